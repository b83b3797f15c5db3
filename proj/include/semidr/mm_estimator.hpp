#pragma once

#include "semidr/dataset.hpp"
#include "semidr/ratio_model.hpp"
#include "semidr/types.hpp"

namespace semidr {

/// Estimating function used in the moment-matching equation.
///   Optimal:       eta(x) = grad log r(x; theta) / (1 + rho r(x; theta))
///   PlainGradient: eta(x) = grad log r(x; theta)
enum class EtaKind { Optimal, PlainGradient };

const char* to_string(EtaKind kind);

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 100;
    double fd_step = 1e-6;
    int max_halvings = 20;
    /// Jacobians with a larger 2-norm condition number count as singular.
    double max_condition = 1e14;
};

SolverOptions solver_options_from_config(const FlatConfig& config);

struct FitResult {
    Vector theta_hat;
    bool converged = false;
    int iterations = 0;
    /// Max-norm of the estimating equation at theta_hat.
    double final_residual = 0.0;
    /// (1/m_n) sum_j eta(x_j) grad log r(x_j)^T over the numerator sample.
    Matrix U_hat;
    /// 2-norm condition number of the finite-difference Jacobian at theta_hat.
    double jacobian_condition = 0.0;
    EtaKind eta = EtaKind::Optimal;
};

/// Per-sample quantities of the estimating equation at a fixed theta.
struct EtaSamples {
    Vector ratio_num;   // r(x_j) over the numerator sample
    Vector ratio_den;   // r(x_i) over the denominator sample
    Matrix grad_num;    // rows: grad log r(x_j)
    Matrix grad_den;    // rows: grad log r(x_i)
    Matrix eta_num;     // rows: eta(x_j)
    Matrix eta_den;     // rows: eta(x_i)
};

/// Caches the feature matrices of a dataset so that the estimating equation
/// can be evaluated repeatedly during a solve.
class MomentProblem {
public:
    MomentProblem(const Dataset& data, const RatioModel& model, EtaKind eta);

    const RatioModel& model() const noexcept { return model_; }
    EtaKind eta() const noexcept { return eta_; }
    double rho() const noexcept { return rho_; }
    const Matrix& features_num() const noexcept { return phi_num_; }
    const Matrix& features_den() const noexcept { return phi_den_; }

    EtaSamples evaluate(const Vector& theta) const;
    Vector residual(const Vector& theta) const;
    /// Central finite-difference Jacobian of residual(); falls back to a
    /// one-sided difference where the central stencil leaves the model domain.
    Matrix jacobian(const Vector& theta, double fd_step) const;
    Matrix u_hat(const EtaSamples& samples) const;

private:
    RatioModel model_;
    EtaKind eta_;
    double rho_;
    Matrix phi_num_;
    Matrix phi_den_;
};

/// Q_eta(theta) = (1/m_d) sum_i r(x_i^d) eta(x_i^d) - (1/m_n) sum_j eta(x_j^n).
Vector estimating_equation(const Dataset& data, const RatioModel& model, EtaKind eta, const Vector& theta);

/// Damped Newton solve of Q_eta(theta) = 0 from the model's null parameter.
/// A run that exhausts its iterations or its step halvings returns with
/// converged = false. Throws SingularJacobian when a Newton system cannot be
/// solved reliably.
FitResult fit(const Dataset& data, const RatioModel& model, EtaKind eta, const SolverOptions& options = {});
FitResult fit(const MomentProblem& problem, const SolverOptions& options = {});

/// m-scaled covariance of theta_hat:
///   U^{-1} [rho V_d[r eta] + V_n[eta]] / (rho + 1) U^{-T}
/// with plug-in (1/n) sample covariances.
Matrix theta_asymptotic_variance(const Dataset& data, const RatioModel& model, EtaKind eta, const Vector& theta_hat);

/// The sandwich formula above on already-evaluated samples.
Matrix asymptotic_sandwich(const EtaSamples& samples, double rho);

/// Plug-in (divide by n) covariance of the rows of x.
Matrix sample_covariance(const Matrix& x);

}  // namespace semidr
