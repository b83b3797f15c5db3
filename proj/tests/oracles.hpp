#pragma once

// Reference computations shared by the unit and acceptance tests. Nothing here
// calls into the library under test.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& g, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = g(a) + g(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
    return s * h / 3.0;
}

inline double normal_pdf(double x, double mu = 0.0, double sigma = 1.0) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Chi-square density with k degrees of freedom.
inline double chi2_pdf(double x, int k) {
    if (x <= 0.0) return 0.0;
    const double h = 0.5 * k;
    return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) - std::lgamma(h));
}

// CDF by integrating the density; the substitution x = u^2 removes the
// singularity at 0 for k = 1.
inline double chi2_cdf_by_quadrature(double x, int k) {
    const double h = 0.5 * k;
    const double log_norm = h * std::log(2.0) + std::lgamma(h);
    auto integrand = [&](double u) {
        if (u == 0.0) return k == 1 ? 2.0 * std::exp(-log_norm) : 0.0;
        return 2.0 * std::exp((k - 1.0) * std::log(u) - 0.5 * u * u - log_norm);
    };
    return simpson(integrand, 0.0, std::sqrt(x), 200000);
}

// Fourth-order central second derivative.
inline double second_derivative(const std::function<double(double)>& f, double x, double h = 1e-3) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

// Fraction of ||Z + delta||^2 >= x over `draws` draws, delta = sqrt(ncp) e_1.
// Uses std::normal_distribution so it shares nothing with the library sampler.
inline double noncentral_chi2_sf_mc(double x, int k, double ncp, int draws, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    const double delta = std::sqrt(ncp);
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) {
            const double v = z(gen) + (j == 0 ? delta : 0.0);
            s += v * v;
        }
        hits += s >= x;
    }
    return static_cast<double>(hits) / draws;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

// Unbiased sample variance.
inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

}  // namespace oracle
