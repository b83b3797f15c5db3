#include "semidr/mm_estimator.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "semidr/errors.hpp"

namespace semidr {

const char* to_string(EtaKind kind) {
    return kind == EtaKind::Optimal ? "optimal" : "plain";
}

SolverOptions solver_options_from_config(const FlatConfig& config) {
    SolverOptions options;
    options.tol = config.get_double("tol", options.tol);
    options.max_iter = static_cast<int>(config.get_int("max_iter", options.max_iter));
    options.fd_step = config.get_double("fd_step", options.fd_step);
    if (!(options.tol > 0.0) || options.max_iter < 1 || !(options.fd_step > 0.0)) {
        throw ConfigError("solver options require tol > 0, max_iter >= 1 and fd_step > 0");
    }
    return options;
}

MomentProblem::MomentProblem(const Dataset& data, const RatioModel& model, EtaKind eta)
    : model_(model), eta_(eta), rho_(data.rho()) {
    if (data.dim() != model.input_dim()) {
        throw DimensionMismatch("dataset has dimension " + std::to_string(data.dim()) + ", model expects " +
                                std::to_string(model.input_dim()));
    }
    phi_num_ = model.features().evaluate_rows(data.numerator());
    phi_den_ = model.features().evaluate_rows(data.denominator());
}

EtaSamples MomentProblem::evaluate(const Vector& theta) const {
    EtaSamples s;
    s.ratio_num = model_.ratios(phi_num_, theta);
    s.ratio_den = model_.ratios(phi_den_, theta);
    s.grad_num = model_.grad_log_ratios(phi_num_, theta, s.ratio_num);
    s.grad_den = model_.grad_log_ratios(phi_den_, theta, s.ratio_den);
    if (eta_ == EtaKind::Optimal) {
        s.eta_num = (1.0 + rho_ * s.ratio_num.array()).inverse().matrix().asDiagonal() * s.grad_num;
        s.eta_den = (1.0 + rho_ * s.ratio_den.array()).inverse().matrix().asDiagonal() * s.grad_den;
    } else {
        s.eta_num = s.grad_num;
        s.eta_den = s.grad_den;
    }
    return s;
}

Vector MomentProblem::residual(const Vector& theta) const {
    // Weighted column sums; avoids materializing eta for the hot path.
    const Vector r_den = model_.ratios(phi_den_, theta);
    const Vector r_num = model_.ratios(phi_num_, theta);
    const double md = static_cast<double>(phi_den_.rows());
    const double mn = static_cast<double>(phi_num_.rows());

    auto weights = [&](const Matrix& phi, const Vector& r) -> Vector {
        Vector w = Vector::Ones(r.size());
        if (model_.link() == Link::Linear) {
            w = r.cwiseInverse();
        } else if (model_.link() == Link::Power) {
            w = (1.0 + model_.alpha() * (phi * theta).array()).inverse().matrix();
        }
        if (eta_ == EtaKind::Optimal) w.array() /= (1.0 + rho_ * r.array());
        return w;
    };
    const Vector w_den = weights(phi_den_, r_den).cwiseProduct(r_den) / md;
    const Vector w_num = weights(phi_num_, r_num) / mn;
    return phi_den_.transpose() * w_den - phi_num_.transpose() * w_num;
}

Matrix MomentProblem::jacobian(const Vector& theta, double fd_step) const {
    const auto d = theta.size();
    Matrix jac(d, d);
    auto try_residual = [&](const Vector& t, Vector& out) {
        try {
            out = residual(t);
            return out.allFinite();
        } catch (const NonpositiveRatio&) {
            return false;
        }
    };
    Vector plus, minus, center;
    bool have_center = false;
    for (Eigen::Index k = 0; k < d; ++k) {
        const double h = fd_step * std::max(1.0, std::abs(theta(k)));
        Vector tp = theta, tm = theta;
        tp(k) += h;
        tm(k) -= h;
        const bool ok_p = try_residual(tp, plus);
        const bool ok_m = try_residual(tm, minus);
        if (ok_p && ok_m) {
            jac.col(k) = (plus - minus) / (2.0 * h);
            continue;
        }
        if (!have_center) {
            center = residual(theta);
            have_center = true;
        }
        if (ok_p) {
            jac.col(k) = (plus - center) / h;
        } else if (ok_m) {
            jac.col(k) = (center - minus) / h;
        } else {
            throw NonpositiveRatio("finite-difference stencil leaves the model domain");
        }
    }
    return jac;
}

Matrix MomentProblem::u_hat(const EtaSamples& samples) const {
    return samples.eta_num.transpose() * samples.grad_num / static_cast<double>(samples.eta_num.rows());
}

Vector estimating_equation(const Dataset& data, const RatioModel& model, EtaKind eta, const Vector& theta) {
    return MomentProblem(data, model, eta).residual(theta);
}

namespace {

double condition_number(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

}  // namespace

FitResult fit(const Dataset& data, const RatioModel& model, EtaKind eta, const SolverOptions& options) {
    return fit(MomentProblem(data, model, eta), options);
}

FitResult fit(const MomentProblem& problem, const SolverOptions& options) {
    FitResult result;
    result.eta = problem.eta();
    Vector theta = problem.model().null_parameter();
    Vector q = problem.residual(theta);
    if (!q.allFinite()) throw NotConverged("estimating equation is not finite at the initial point");

    int iter = 0;
    for (; iter < options.max_iter; ++iter) {
        if (q.lpNorm<Eigen::Infinity>() <= options.tol) break;

        const Matrix jac = problem.jacobian(theta, options.fd_step);
        const double cond = condition_number(jac);
        if (!(cond <= options.max_condition)) {
            throw SingularJacobian("Jacobian of the estimating equation is singular (condition " +
                                       std::to_string(cond) + ")",
                                   cond);
        }
        const Vector step = jac.partialPivLu().solve(-q);

        const double norm0 = q.norm();
        bool accepted = false;
        double lambda = 1.0;
        for (int halving = 0; halving <= options.max_halvings; ++halving, lambda *= 0.5) {
            Vector trial = theta + lambda * step;
            Vector q_trial;
            try {
                q_trial = problem.residual(trial);
            } catch (const NonpositiveRatio&) {
                continue;
            }
            if (q_trial.allFinite() && q_trial.norm() < norm0) {
                theta = std::move(trial);
                q = std::move(q_trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }

    result.theta_hat = theta;
    result.iterations = iter;
    result.final_residual = q.lpNorm<Eigen::Infinity>();
    result.converged = result.final_residual <= options.tol;
    const EtaSamples samples = problem.evaluate(theta);
    result.U_hat = problem.u_hat(samples);
    try {
        result.jacobian_condition = condition_number(problem.jacobian(theta, options.fd_step));
    } catch (const NonpositiveRatio&) {
        result.jacobian_condition = std::numeric_limits<double>::infinity();
    }
    return result;
}

Matrix sample_covariance(const Matrix& x) {
    const double n = static_cast<double>(x.rows());
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - mean;
    return centered.transpose() * centered / n;
}

Matrix asymptotic_sandwich(const EtaSamples& samples, double rho) {
    const Matrix u = samples.eta_num.transpose() * samples.grad_num / static_cast<double>(samples.eta_num.rows());
    const Matrix r_eta_den = samples.ratio_den.asDiagonal() * samples.eta_den;
    const Matrix center = (rho * sample_covariance(r_eta_den) + sample_covariance(samples.eta_num)) / (rho + 1.0);
    Eigen::FullPivLU<Matrix> lu(u);
    if (!lu.isInvertible() || condition_number(u) > 1e14) {
        throw SingularJacobian("U_eta is singular", condition_number(u));
    }
    const Matrix u_inv = lu.inverse();
    return u_inv * center * u_inv.transpose();
}

Matrix theta_asymptotic_variance(const Dataset& data, const RatioModel& model, EtaKind eta, const Vector& theta_hat) {
    MomentProblem problem(data, model, eta);
    return asymptotic_sandwich(problem.evaluate(theta_hat), data.rho());
}

}  // namespace semidr
