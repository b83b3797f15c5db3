#include "semidr/ratio_model.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "semidr/errors.hpp"

namespace semidr {

FeatureMap::FeatureMap(int input_dim, int degree, bool cross_terms)
    : input_dim_(input_dim), degree_(degree), cross_terms_(cross_terms) {
    if (input_dim < 1) throw InvalidArgument("feature map input dimension must be >= 1");
    if (degree < 0 || degree > 2) throw InvalidArgument("feature map degree must be 0, 1 or 2");
    if (cross_terms && degree != 2) throw InvalidArgument("cross terms require degree 2");
    dimension_ = 1;
    if (degree >= 1) dimension_ += input_dim;
    if (degree >= 2) dimension_ += input_dim;
    if (cross_terms) dimension_ += input_dim * (input_dim - 1) / 2;
}

Vector FeatureMap::evaluate(const Vector& x) const {
    if (x.size() != input_dim_) {
        throw DimensionMismatch("feature map expects points of dimension " + std::to_string(input_dim_) +
                                ", got " + std::to_string(x.size()));
    }
    Vector phi(dimension_);
    int k = 0;
    phi(k++) = 1.0;
    if (degree_ >= 1) {
        for (int i = 0; i < input_dim_; ++i) phi(k++) = x(i);
    }
    if (degree_ >= 2) {
        for (int i = 0; i < input_dim_; ++i) phi(k++) = x(i) * x(i);
    }
    if (cross_terms_) {
        for (int i = 0; i < input_dim_; ++i)
            for (int j = i + 1; j < input_dim_; ++j) phi(k++) = x(i) * x(j);
    }
    return phi;
}

Matrix FeatureMap::evaluate_rows(const Matrix& samples) const {
    if (samples.cols() != input_dim_) {
        throw DimensionMismatch("feature map expects samples with " + std::to_string(input_dim_) +
                                " columns, got " + std::to_string(samples.cols()));
    }
    const auto n = samples.rows();
    Matrix phi(n, dimension_);
    int k = 0;
    phi.col(k++).setOnes();
    if (degree_ >= 1) {
        for (int i = 0; i < input_dim_; ++i) phi.col(k++) = samples.col(i);
    }
    if (degree_ >= 2) {
        for (int i = 0; i < input_dim_; ++i) phi.col(k++) = samples.col(i).array().square();
    }
    if (cross_terms_) {
        for (int i = 0; i < input_dim_; ++i)
            for (int j = i + 1; j < input_dim_; ++j)
                phi.col(k++) = samples.col(i).array() * samples.col(j).array();
    }
    return phi;
}

std::string FeatureMap::describe() const {
    std::ostringstream os;
    static constexpr std::array<const char*, 3> names{"constant", "linear", "linear-quadratic"};
    os << (cross_terms_ ? "quadratic" : names[degree_]) << "(p=" << input_dim_ << ", d=" << dimension_ << ")";
    return os.str();
}

RatioModel::RatioModel(FeatureMap features, Link link, double alpha)
    : features_(std::move(features)), link_(link), alpha_(link == Link::Power ? alpha : 0.0) {
    if (link == Link::Power && (!(alpha > -1.0) || alpha == 0.0 || !std::isfinite(alpha))) {
        throw InvalidAlpha("power link requires alpha > -1 and alpha != 0");
    }
}

Vector RatioModel::null_parameter() const {
    Vector theta = Vector::Zero(parameter_dim());
    if (link_ == Link::Linear) theta(0) = 1.0;
    return theta;
}

double RatioModel::ratio_from_predictor(double t) const {
    switch (link_) {
        case Link::Exponential:
            return std::exp(t);
        case Link::Linear:
            if (!(t > 0.0)) throw NonpositiveRatio("linear model gives theta^T phi(x) <= 0");
            return t;
        case Link::Power: {
            double base = 1.0 + alpha_ * t;
            if (!(base > 0.0)) throw NonpositiveRatio("power model gives 1 + alpha theta^T phi(x) <= 0");
            return std::exp(std::log(base) / alpha_);
        }
    }
    return 0.0;
}

double RatioModel::gradient_scale(double t, double r) const {
    switch (link_) {
        case Link::Exponential:
            return 1.0;
        case Link::Linear:
            return 1.0 / r;
        case Link::Power:
            return 1.0 / (1.0 + alpha_ * t);
    }
    return 0.0;
}

void RatioModel::check_parameter(const Vector& theta) const {
    if (theta.size() != parameter_dim()) {
        throw DimensionMismatch("parameter has dimension " + std::to_string(theta.size()) + ", model expects " +
                                std::to_string(parameter_dim()));
    }
}

double RatioModel::eval_ratio(const Vector& theta, const Vector& x) const {
    check_parameter(theta);
    return ratio_from_predictor(theta.dot(features_.evaluate(x)));
}

Vector RatioModel::grad_log_ratio(const Vector& theta, const Vector& x) const {
    check_parameter(theta);
    Vector phi = features_.evaluate(x);
    double t = theta.dot(phi);
    double r = ratio_from_predictor(t);
    return gradient_scale(t, r) * phi;
}

Vector RatioModel::ratios(const Matrix& phi, const Vector& theta) const {
    check_parameter(theta);
    Vector t = phi * theta;
    if (link_ == Link::Exponential) return t.array().exp().matrix();
    Vector r(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) r(i) = ratio_from_predictor(t(i));
    return r;
}

Matrix RatioModel::grad_log_ratios(const Matrix& phi, const Vector& theta, const Vector& ratios) const {
    if (link_ == Link::Exponential) return phi;
    Vector scale(ratios.size());
    if (link_ == Link::Linear) {
        scale = ratios.cwiseInverse();
    } else {
        scale = (1.0 + alpha_ * (phi * theta).array()).inverse().matrix();
    }
    return scale.asDiagonal() * phi;
}

std::string RatioModel::describe() const {
    std::ostringstream os;
    switch (link_) {
        case Link::Exponential: os << "exp"; break;
        case Link::Linear: os << "linear"; break;
        case Link::Power: os << "power(alpha=" << alpha_ << ")"; break;
    }
    os << " " << features_.describe();
    return os.str();
}

double eval_ratio(const RatioModel& model, const Vector& theta, const Vector& x) {
    return model.eval_ratio(theta, x);
}

Vector grad_log_ratio(const RatioModel& model, const Vector& theta, const Vector& x) {
    return model.grad_log_ratio(theta, x);
}

RatioModel model_from_config(const FlatConfig& config) {
    static constexpr std::array<std::string_view, 4> keys{"link", "alpha", "features", "p"};
    config.require_known(keys);
    const auto p = config.get_int("p");
    if (p < 1) throw ConfigError("model p must be >= 1");
    const auto features_name = config.get_string("features", "linear-quadratic");
    const int input_dim = static_cast<int>(p);
    auto features = [&]() -> FeatureMap {
        if (features_name == "linear-quadratic") return FeatureMap::linear_quadratic(input_dim);
        if (features_name == "linear") return FeatureMap::linear(input_dim);
        if (features_name == "constant") return FeatureMap::constant(input_dim);
        if (features_name == "quadratic") return FeatureMap(input_dim, 2, true);
        throw ConfigError("unknown feature map '" + features_name + "'");
    }();
    const auto link = config.get_string("link", "exp");
    if (link == "exp") {
        if (config.has("alpha")) throw ConfigError("alpha is only valid for the power link");
        return RatioModel::exponential(features);
    }
    if (link == "linear") {
        if (config.has("alpha")) throw ConfigError("alpha is only valid for the power link");
        return RatioModel::linear(features);
    }
    if (link == "power") return RatioModel::power(features, config.get_double("alpha"));
    throw ConfigError("unknown link '" + link + "'");
}

}  // namespace semidr
