#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nashlab/errors.hpp"

namespace nashlab {

/// Probability measure on the real line, seen through integrals of test
/// functions. Cost families consume this interface so the same coupling
/// works against empirical configurations and density flows.
class Measure {
  public:
    virtual ~Measure() = default;
    virtual double integrate(const std::function<double(double)>& phi) const = 0;
    virtual double mean() const {
        return integrate([](double y) { return y; });
    }
};

/// Equal-weight atoms; nonempty.
class EmpiricalMeasure : public Measure {
  public:
    explicit EmpiricalMeasure(std::vector<double> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw InvalidArgument("empirical measure: needs at least one atom");
    }
    double integrate(const std::function<double(double)>& phi) const override {
        double acc = 0.0;
        for (double a : atoms_) acc += phi(a);
        return acc / static_cast<double>(atoms_.size());
    }
    double mean() const override {
        double acc = 0.0;
        for (double a : atoms_) acc += a;
        return acc / static_cast<double>(atoms_.size());
    }
    const std::vector<double>& atoms() const { return atoms_; }

  private:
    std::vector<double> atoms_;
};

/// Density samples on a uniform grid of nodes, weight h per node.
class GridDensity : public Measure {
  public:
    GridDensity(std::span<const double> nodes, std::span<const double> density, double h)
        : nodes_(nodes.begin(), nodes.end()), density_(density.begin(), density.end()), h_(h) {
        if (nodes_.size() != density_.size() || nodes_.empty())
            throw InvalidArgument("grid density: nodes/density size mismatch");
    }
    double integrate(const std::function<double(double)>& phi) const override {
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes_.size(); ++k) acc += phi(nodes_[k]) * density_[k];
        return acc * h_;
    }
    double mean() const override {
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes_.size(); ++k) acc += nodes_[k] * density_[k];
        return acc * h_;
    }

  private:
    std::vector<double> nodes_;
    std::vector<double> density_;
    double h_;
};

}  // namespace nashlab
