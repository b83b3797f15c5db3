#pragma once

#include <string>

#include "semidr/flat_config.hpp"
#include "semidr/types.hpp"

namespace semidr {

/// Polynomial feature map of degree <= 2 on R^p. The first feature is always
/// the constant 1, followed by the linear terms x_1..x_p (degree >= 1), the
/// squares x_1^2..x_p^2 (degree 2), and, when cross terms are enabled, the
/// products x_i x_j for i < j.
class FeatureMap {
public:
    FeatureMap(int input_dim, int degree, bool cross_terms = false);

    /// (1, x_1..x_p, x_1^2..x_p^2): the 21-parameter map for p = 10.
    static FeatureMap linear_quadratic(int input_dim) { return {input_dim, 2, false}; }
    static FeatureMap linear(int input_dim) { return {input_dim, 1, false}; }
    static FeatureMap constant(int input_dim) { return {input_dim, 0, false}; }

    int input_dim() const noexcept { return input_dim_; }
    int dimension() const noexcept { return dimension_; }
    int degree() const noexcept { return degree_; }
    bool cross_terms() const noexcept { return cross_terms_; }

    Vector evaluate(const Vector& x) const;
    /// Row i of the result is phi(row i of samples).
    Matrix evaluate_rows(const Matrix& samples) const;

    std::string describe() const;

private:
    int input_dim_;
    int degree_;
    bool cross_terms_;
    int dimension_;
};

enum class Link { Exponential, Linear, Power };

/// Semiparametric density-ratio model r(x; theta) = link(theta^T phi(x)).
///   Exponential: exp(t)
///   Linear:      t                  (t must be > 0)
///   Power(a):    (1 + a t)^(1/a)    (a > -1, a != 0, base must be > 0)
class RatioModel {
public:
    RatioModel(FeatureMap features, Link link, double alpha = 0.0);

    static RatioModel exponential(FeatureMap features) { return {std::move(features), Link::Exponential}; }
    static RatioModel linear(FeatureMap features) { return {std::move(features), Link::Linear}; }
    static RatioModel power(FeatureMap features, double alpha) { return {std::move(features), Link::Power, alpha}; }

    const FeatureMap& features() const noexcept { return features_; }
    Link link() const noexcept { return link_; }
    double alpha() const noexcept { return alpha_; }
    int parameter_dim() const noexcept { return features_.dimension(); }
    int input_dim() const noexcept { return features_.input_dim(); }

    /// Parameter at which r(x; theta) == 1 for every x: zero for the
    /// exponential and power links, e_1 for the linear link.
    Vector null_parameter() const;

    /// Ratio from a precomputed linear predictor t = theta^T phi(x).
    double ratio_from_predictor(double t) const;
    /// Multiplier w with grad log r = w * phi(x), given t and r.
    double gradient_scale(double t, double r) const;

    double eval_ratio(const Vector& theta, const Vector& x) const;
    Vector grad_log_ratio(const Vector& theta, const Vector& x) const;

    /// Vectorized evaluation over precomputed feature rows.
    Vector ratios(const Matrix& phi, const Vector& theta) const;
    Matrix grad_log_ratios(const Matrix& phi, const Vector& theta, const Vector& ratios) const;

    std::string describe() const;

private:
    void check_parameter(const Vector& theta) const;

    FeatureMap features_;
    Link link_;
    double alpha_;
};

double eval_ratio(const RatioModel& model, const Vector& theta, const Vector& x);
Vector grad_log_ratio(const RatioModel& model, const Vector& theta, const Vector& x);

/// Builds a model from {link = "exp"|"linear"|"power", alpha, features, p}.
/// features is one of "constant", "linear", "linear-quadratic" or "quadratic"
/// (degree two with cross terms).
RatioModel model_from_config(const FlatConfig& config);

}  // namespace semidr
