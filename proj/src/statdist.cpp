#include "semidr/statdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "semidr/errors.hpp"

namespace semidr {
namespace {

void check_dof(int k) {
    if (k < 1) throw InvalidDof("degrees of freedom must be >= 1, got " + std::to_string(k));
}

void check_level(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidLevel("probability must lie in (0, 1)");
}

double chi2_pdf(double x, int k) {
    if (x <= 0.0) return 0.0;
    const double a = 0.5 * k;
    return 0.5 * boost::math::gamma_p_derivative(a, 0.5 * x);
}

}  // namespace

double chi2_cdf(double x, int k) {
    check_dof(k);
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(0.5 * k, 0.5 * x);
}

double chi2_sf(double x, int k) {
    check_dof(k);
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

double chi2_quantile(double p, int k) {
    check_level(p);
    check_dof(k);
    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(k));
    while (chi2_cdf(hi, k) < p) {
        lo = hi;
        hi *= 2.0;
    }
    double x = 0.5 * (lo + hi);
    if (p < 1e-3) {
        // Small-x behaviour of the cdf: (x/2)^(k/2) / Gamma(k/2 + 1).
        const double guess = 2.0 * std::exp((std::log(p) + std::lgamma(0.5 * k + 1.0)) / (0.5 * k));
        if (guess > lo && guess < hi) x = guess;
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double err = chi2_cdf(x, k) - p;
        if (std::abs(err) <= 1e-15 * p) break;
        if (err > 0.0) hi = x; else lo = x;
        const double density = chi2_pdf(x, k);
        double next = density > 0.0 ? x - err / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

double noncentral_chi2_sf(double x, int k, double ncp) {
    check_dof(k);
    if (!(ncp >= 0.0) || !std::isfinite(ncp)) throw InvalidArgument("noncentrality must be finite and >= 0");
    if (ncp == 0.0) return chi2_sf(x, k);
    if (!(x > 0.0)) return 1.0;
    const double lambda = 0.5 * ncp;
    const double mode = std::floor(lambda);
    auto log_weight = [&](double j) { return -lambda + j * std::log(lambda) - std::lgamma(j + 1.0); };
    auto term = [&](double j) { return boost::math::gamma_q(0.5 * k + j, 0.5 * x); };

    constexpr double tail_tol = 1e-12;
    double sum = 0.0;
    double visited = 0.0;
    // Downward from the mode (inclusive), then upward.
    for (double j = mode; j >= 0.0; j -= 1.0) {
        const double w = std::exp(log_weight(j));
        sum += w * term(j);
        visited += w;
        if (1.0 - visited < tail_tol) return std::clamp(sum, 0.0, 1.0);
        if (w < 1e-300 && j < mode) break;
    }
    for (double j = mode + 1.0;; j += 1.0) {
        const double w = std::exp(log_weight(j));
        sum += w * term(j);
        visited += w;
        if (1.0 - visited < tail_tol || (j > lambda + 10.0 && w < 1e-300)) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double f_cdf(double x, int d1, int d2) {
    check_dof(d1);
    check_dof(d2);
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double a = 0.5 * d1, b = 0.5 * d2;
    const double t = d1 * x;
    return boost::math::ibeta(a, b, t / (t + d2));
}

double f_sf(double x, int d1, int d2) {
    check_dof(d1);
    check_dof(d2);
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double a = 0.5 * d1, b = 0.5 * d2;
    const double t = d1 * x;
    // 1 - I_y(a, b) = I_{1-y}(b, a) with 1 - y = d2 / (d1 x + d2).
    return boost::math::ibeta(b, a, d2 / (t + d2));
}

double f_quantile(double p, int d1, int d2) {
    check_level(p);
    check_dof(d1);
    check_dof(d2);
    const double y = boost::math::ibeta_inv(0.5 * d1, 0.5 * d2, p);
    if (y >= 1.0) return std::numeric_limits<double>::infinity();
    return d2 * y / (d1 * (1.0 - y));
}

double normal_cdf(double x) {
    return 0.5 * boost::math::erfc(-x / std::sqrt(2.0));
}

Matrix sample_mvn_standard(RngStream& rng, int n, int p) {
    if (n < 0 || p < 1) throw InvalidArgument("sample shape must have n >= 0 and p >= 1");
    Matrix out(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) out(i, j) = rng.normal();
    return out;
}

Matrix sample_iid_t(RngStream& rng, int n, int p, double dof) {
    if (n < 0 || p < 1) throw InvalidArgument("sample shape must have n >= 0 and p >= 1");
    if (!(dof > 0.0)) throw InvalidDof("t distribution requires dof > 0");
    Matrix out(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) out(i, j) = rng.student_t(dof);
    return out;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double c = cdf(sorted[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - c, c - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_value(std::size_t n, double level) {
    check_level(level);
    return std::sqrt(-0.5 * std::log(0.5 * level)) / std::sqrt(static_cast<double>(n));
}

}  // namespace semidr
