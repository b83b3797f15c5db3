#pragma once

#include <functional>
#include <span>

#include "semidr/rng.hpp"
#include "semidr/types.hpp"

namespace semidr {

/// Regularized lower incomplete gamma P(k/2, x/2). Throws InvalidDof for k < 1.
double chi2_cdf(double x, int k);
double chi2_sf(double x, int k);
/// Inverse of chi2_cdf by bracketing and safeguarded Newton steps.
/// Throws InvalidLevel unless 0 < p < 1.
double chi2_quantile(double p, int k);

/// Survival function of the noncentral chi-square as a Poisson(ncp/2)
/// mixture of central chi-square tails with k + 2j degrees of freedom.
/// The sum runs outward from the Poisson mode until the unvisited Poisson
/// mass is below 1e-12.
double noncentral_chi2_sf(double x, int k, double ncp);

double f_cdf(double x, int d1, int d2);
double f_sf(double x, int d1, int d2);
double f_quantile(double p, int d1, int d2);

double normal_cdf(double x);

/// n x p matrix of iid N(0, 1) entries, filled row by row.
Matrix sample_mvn_standard(RngStream& rng, int n, int p);
/// n x p matrix of iid Student-t(dof) entries, filled row by row.
Matrix sample_iid_t(RngStream& rng, int n, int p, double dof);

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and `cdf`.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);
/// Asymptotic critical value sqrt(-log(level/2)/2)/sqrt(n) of the one-sample KS test.
double ks_critical_value(std::size_t n, double level);

}  // namespace semidr
