#pragma once

#include <vector>

#include "mat.hpp"

namespace ttsa {

/// Standard normal CDF.
double normal_cdf(double z);

/// Standard normal quantile; rational-mimimax evaluation accurate to
/// near machine precision over (0, 1).
double normal_quantile(double p);

/// Exact Kolmogorov distance between the empirical law of the sample and
/// N(0, sigma2). The sample may be degenerate (repeated values); the target
/// variance must be positive.
double ks_gaussian_1d(Vec sample, double sigma2);

/// Order-statistic coupling estimate of the Wasserstein-1 distance between
/// the sample law and N(0, sigma2): mean_i |x_(i) - sd * quantile((i-1/2)/n)|.
double w1_gaussian_1d(Vec sample, double sigma2);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x; needs >= 2 points with
/// nonconstant x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Pairwise-tree sum. The result depends only on the values and their order,
/// so accumulations over per-replication slots are thread-count independent.
double tree_sum(std::vector<double> values);

}  // namespace ttsa
