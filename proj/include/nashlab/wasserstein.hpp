#pragma once

#include <span>

namespace nashlab {

/// p-Wasserstein distance between two uniform atomic measures on the line
/// (sizes may differ). Exact quantile matching: the integral of
/// |F_a^{-1} - F_b^{-1}|^p over the merged quantile breakpoints.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, double p = 1.0);

/// W_1 between two densities on the same uniform grid: the CDF distance
/// h * sum |F_a - F_b| over interfaces.
double wasserstein_grid_1d(std::span<const double> da, std::span<const double> db, double h);

}  // namespace nashlab
