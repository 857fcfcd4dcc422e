#include "nashlab/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nashlab/errors.hpp"

namespace nashlab {

double wasserstein_1d(std::span<const double> a, std::span<const double> b, double p) {
    if (a.empty() || b.empty()) throw InvalidArgument("wasserstein: empty sample");
    if (!(p >= 1.0)) throw InvalidArgument("wasserstein: order must be >= 1");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const auto n = sa.size(), m = sb.size();

    // Walk the merged quantile grid {i/n} union {j/m}; both inverse CDFs are
    // constant on each segment.
    double integral = 0.0;
    double q = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < n && ib < m) {
        const double qa = static_cast<double>(ia + 1) / static_cast<double>(n);
        const double qb = static_cast<double>(ib + 1) / static_cast<double>(m);
        const double q_end = std::min(qa, qb);
        integral += (q_end - q) * std::pow(std::abs(sa[ia] - sb[ib]), p);
        q = q_end;
        if (qa <= q_end) ++ia;
        if (qb <= q_end) ++ib;
    }
    return std::pow(integral, 1.0 / p);
}

double wasserstein_grid_1d(std::span<const double> da, std::span<const double> db, double h) {
    if (da.size() != db.size() || da.empty())
        throw InvalidArgument("wasserstein: density size mismatch");
    double acc = 0.0, ca = 0.0, cb = 0.0;
    for (std::size_t k = 0; k + 1 < da.size(); ++k) {
        ca += da[k] * h;
        cb += db[k] * h;
        acc += std::abs(ca - cb);
    }
    return acc * h;
}

}  // namespace nashlab
