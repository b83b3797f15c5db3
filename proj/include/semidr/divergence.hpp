#pragma once

#include <functional>
#include <string>

#include "semidr/dataset.hpp"
#include "semidr/mm_estimator.hpp"
#include "semidr/ratio_model.hpp"
#include "semidr/rng.hpp"
#include "semidr/types.hpp"

namespace semidr {

enum class DivergenceKind { KL, MI, Power, LinearKL };

/// How f is split as f(r) = f_d(r) + r f_n(r).
///   Optimal:   f_d = f/(1+rho r), f_n = rho f/(1+rho r) for KL, Power and
///              LinearKL; the mutual-information split for MI.
///   Conjugate: f_d = f - r f', f_n = f' (KL and Power only).
///   Example:   KL:       f_d = -log r - 1,                f_n = 1
///              Power:    f_d = -1 + (r^-a - 1)/a,         f_n = 1
///              LinearKL: f_d = log((1+rho r)/(r(1+rho)))/(1+rho), f_n = f'
///              MI:       same as Optimal
enum class DecompositionKind { Optimal, Conjugate, Example };

const char* to_string(DivergenceKind kind);
const char* to_string(DecompositionKind kind);
DivergenceKind parse_divergence_kind(const std::string& name);
DecompositionKind parse_decomposition_kind(const std::string& name);

/// A convex f with f(1) = f'(1) = 0 together with one decomposition.
/// MI and LinearKL embed the sample-size ratio rho in f itself; every
/// Optimal decomposition embeds it in the split.
class FDivergence {
public:
    DivergenceKind kind() const noexcept { return kind_; }
    DecompositionKind decomposition() const noexcept { return decomposition_; }
    double alpha() const noexcept { return alpha_; }
    double rho() const noexcept { return rho_; }
    bool rho_dependent() const noexcept { return kind_ == DivergenceKind::MI || kind_ == DivergenceKind::LinearKL; }
    std::string name() const;

    double f(double r) const;
    double f_prime(double r) const;
    double f_double_prime(double r) const;
    double f_double_prime_at_1() const { return f_double_prime(1.0); }
    double f_d(double r) const;
    double f_n(double r) const;

private:
    friend FDivergence make_divergence(DivergenceKind, double, double, DecompositionKind);
    FDivergence(DivergenceKind kind, double rho, double alpha, DecompositionKind decomposition)
        : kind_(kind), decomposition_(decomposition), alpha_(alpha), rho_(rho) {}

    DivergenceKind kind_;
    DecompositionKind decomposition_;
    double alpha_;
    double rho_;
};

/// Throws InvalidAlpha for Power with alpha <= -1 or alpha == 0 and
/// InvalidArgument for rho <= 0 or an unsupported decomposition.
FDivergence make_divergence(DivergenceKind kind, double rho, double alpha = 0.0,
                            DecompositionKind decomposition = DecompositionKind::Optimal);

struct DivergenceEstimate {
    double value = 0.0;
    /// (1/m_n) sum_j [f'(r) - f_n(r)] grad log r over the numerator sample.
    Vector c_hat;
    Matrix U_hat;
    /// Plug-in estimate of the m-scaled asymptotic variance of the estimator.
    double variance_estimate = 0.0;
};

/// D_f estimate (1/m_d) sum f_d(r(x^d)) + (1/m_n) sum f_n(r(x^n)) at the
/// fitted parameter. Throws NotConverged when `fit.converged` is false.
DivergenceEstimate estimate_divergence(const Dataset& data, const RatioModel& model, const FDivergence& div,
                                       const FitResult& fit);

/// Divergence construction parameters that do not depend on the data; the
/// divergence is instantiated against each dataset's realized rho.
struct DivergenceChoice {
    DivergenceKind kind = DivergenceKind::KL;
    double alpha = 0.0;
    DecompositionKind decomposition = DecompositionKind::Optimal;
    EtaKind eta = EtaKind::Optimal;

    FDivergence instantiate(double rho) const { return make_divergence(kind, rho, alpha, decomposition); }
};

/// Reads {divergence, alpha, decomposition} keys; missing keys take defaults.
DivergenceChoice divergence_choice_from_config(const FlatConfig& config);

struct AlternativeScenario {
    RatioModel model;
    std::function<Dataset(RngStream&)> generate;
};

/// Numerator N(mu, 1), denominator N(0, 1), model exp(theta_1 + theta_2 x).
AlternativeScenario gaussian_shift_scenario(double mu, int num_size, int den_size);

struct VarianceComparison {
    double mean_a = 0.0;
    double variance_a = 0.0;
    double mean_b = 0.0;
    double variance_b = 0.0;
    /// variance_a / variance_b.
    double ratio = 0.0;
    int replicates_used = 0;
    int invalid = 0;
};

/// Monte Carlo variance of two divergence estimators over the same simulated
/// datasets. Replicates where either fit fails are dropped and counted.
VarianceComparison decomposition_variance_compare(const AlternativeScenario& scenario, const DivergenceChoice& a,
                                                  const DivergenceChoice& b, int replicates,
                                                  std::uint64_t master_seed = 1);

}  // namespace semidr
