#include "semidr/divergence.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "semidr/errors.hpp"
#include "semidr/statdist.hpp"

namespace semidr {

const char* to_string(DivergenceKind kind) {
    switch (kind) {
        case DivergenceKind::KL: return "kl";
        case DivergenceKind::MI: return "mi";
        case DivergenceKind::Power: return "power";
        case DivergenceKind::LinearKL: return "linear-kl";
    }
    return "?";
}

const char* to_string(DecompositionKind kind) {
    switch (kind) {
        case DecompositionKind::Optimal: return "optimal";
        case DecompositionKind::Conjugate: return "conjugate";
        case DecompositionKind::Example: return "example";
    }
    return "?";
}

DivergenceKind parse_divergence_kind(const std::string& name) {
    if (name == "kl") return DivergenceKind::KL;
    if (name == "mi") return DivergenceKind::MI;
    if (name == "power") return DivergenceKind::Power;
    if (name == "linear-kl") return DivergenceKind::LinearKL;
    throw InvalidArgument("unknown divergence '" + name + "'");
}

DecompositionKind parse_decomposition_kind(const std::string& name) {
    if (name == "optimal") return DecompositionKind::Optimal;
    if (name == "conjugate") return DecompositionKind::Conjugate;
    if (name == "example") return DecompositionKind::Example;
    throw InvalidArgument("unknown decomposition '" + name + "'");
}

FDivergence make_divergence(DivergenceKind kind, double rho, double alpha, DecompositionKind decomposition) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be positive and finite");
    if (kind == DivergenceKind::Power) {
        if (!(alpha > -1.0) || alpha == 0.0 || !std::isfinite(alpha)) {
            throw InvalidAlpha("power divergence requires alpha > -1 and alpha != 0");
        }
    } else {
        alpha = 0.0;
    }
    if (decomposition == DecompositionKind::Conjugate && kind != DivergenceKind::KL &&
        kind != DivergenceKind::Power) {
        throw InvalidArgument("the conjugate decomposition is provided for kl and power only");
    }
    return FDivergence(kind, rho, alpha, decomposition);
}

std::string FDivergence::name() const {
    std::ostringstream os;
    os << to_string(kind_);
    if (kind_ == DivergenceKind::Power) os << "(alpha=" << alpha_ << ")";
    os << "/" << to_string(decomposition_);
    return os.str();
}

namespace {

// log(r (1 + rho) / (1 + rho r)), evaluated without overflow for large r.
double log_mixture_ratio(double r, double rho) {
    if (r > 1.0) return std::log1p(rho) - std::log(rho + 1.0 / r);
    return std::log(r) + (std::log1p(rho) - std::log1p(rho * r));
}

// (r^-a - 1) / a
double power_term(double r, double a) {
    return std::expm1(-a * std::log(r)) / a;
}

}  // namespace

double FDivergence::f(double r) const {
    switch (kind_) {
        case DivergenceKind::KL:
            return r - 1.0 - std::log(r);
        case DivergenceKind::Power:
            return r - 1.0 + power_term(r, alpha_);
        case DivergenceKind::MI: {
            const double b = log_mixture_ratio(r, rho_);
            const double a = std::log1p(rho_) - std::log1p(rho_ * r);
            return (a + r * rho_ * b) / (1.0 + rho_);
        }
        case DivergenceKind::LinearKL: {
            const double l = -log_mixture_ratio(r, rho_);
            return (r - 1.0 + (1.0 + rho_ * r) * l) / (1.0 + rho_);
        }
    }
    return 0.0;
}

double FDivergence::f_prime(double r) const {
    switch (kind_) {
        case DivergenceKind::KL:
            return 1.0 - 1.0 / r;
        case DivergenceKind::Power:
            return 1.0 - std::exp(-(alpha_ + 1.0) * std::log(r));
        case DivergenceKind::MI:
            return rho_ * log_mixture_ratio(r, rho_) / (1.0 + rho_);
        case DivergenceKind::LinearKL:
            return (1.0 - 1.0 / r - rho_ * log_mixture_ratio(r, rho_)) / (1.0 + rho_);
    }
    return 0.0;
}

double FDivergence::f_double_prime(double r) const {
    switch (kind_) {
        case DivergenceKind::KL:
            return 1.0 / (r * r);
        case DivergenceKind::Power:
            return (alpha_ + 1.0) * std::exp(-(alpha_ + 2.0) * std::log(r));
        case DivergenceKind::MI:
            return rho_ / ((1.0 + rho_) * r * (1.0 + rho_ * r));
        case DivergenceKind::LinearKL:
            return (rho_ * (rho_ / (1.0 + rho_ * r) - 1.0 / r) + 1.0 / (r * r)) / (1.0 + rho_);
    }
    return 0.0;
}

double FDivergence::f_d(double r) const {
    switch (decomposition_) {
        case DecompositionKind::Optimal:
            if (kind_ == DivergenceKind::MI) return (std::log1p(rho_) - std::log1p(rho_ * r)) / (1.0 + rho_);
            return f(r) / (1.0 + rho_ * r);
        case DecompositionKind::Conjugate:
            if (kind_ == DivergenceKind::KL) return -std::log(r);
            return -1.0 + power_term(r, alpha_) + std::exp(-alpha_ * std::log(r));
        case DecompositionKind::Example:
            switch (kind_) {
                case DivergenceKind::KL: return -std::log(r) - 1.0;
                case DivergenceKind::Power: return -1.0 + power_term(r, alpha_);
                case DivergenceKind::MI: return (std::log1p(rho_) - std::log1p(rho_ * r)) / (1.0 + rho_);
                case DivergenceKind::LinearKL: return -log_mixture_ratio(r, rho_) / (1.0 + rho_);
            }
    }
    return 0.0;
}

double FDivergence::f_n(double r) const {
    switch (decomposition_) {
        case DecompositionKind::Optimal:
            if (kind_ == DivergenceKind::MI) return f_prime(r);
            return rho_ * f(r) / (1.0 + rho_ * r);
        case DecompositionKind::Conjugate:
            return f_prime(r);
        case DecompositionKind::Example:
            switch (kind_) {
                case DivergenceKind::KL:
                case DivergenceKind::Power: return 1.0;
                case DivergenceKind::MI:
                case DivergenceKind::LinearKL: return f_prime(r);
            }
    }
    return 0.0;
}

DivergenceEstimate estimate_divergence(const Dataset& data, const RatioModel& model, const FDivergence& div,
                                       const FitResult& fit) {
    if (!fit.converged) throw NotConverged("divergence estimate requires a converged fit");
    if (div.rho_dependent() && std::abs(div.rho() - data.rho()) > 1e-12 * data.rho()) {
        throw InvalidArgument("divergence " + div.name() + " was built for rho = " + std::to_string(div.rho()) +
                              " but the dataset has rho = " + std::to_string(data.rho()));
    }
    const MomentProblem problem(data, model, fit.eta);
    const EtaSamples s = problem.evaluate(fit.theta_hat);
    const auto mn = s.ratio_num.size();
    const auto md = s.ratio_den.size();
    const int d = model.parameter_dim();

    Vector fd_den(md), fn_num(mn), gap_num(mn);
    for (Eigen::Index i = 0; i < md; ++i) fd_den(i) = div.f_d(s.ratio_den(i));
    for (Eigen::Index j = 0; j < mn; ++j) {
        fn_num(j) = div.f_n(s.ratio_num(j));
        gap_num(j) = div.f_prime(s.ratio_num(j)) - fn_num(j);
    }

    DivergenceEstimate est;
    est.value = fd_den.mean() + fn_num.mean();
    est.c_hat = s.grad_num.transpose() * gap_num / static_cast<double>(mn);
    est.U_hat = problem.u_hat(s);

    // sqrt(m)(D - D_f) ~ sqrt(m)[mean_d(a) + mean_n(b)] with
    // a = f_d(r) - c^T U^{-1} r eta and b = f_n(r) + c^T U^{-1} eta.
    Vector weights = Vector::Zero(d);
    if (est.c_hat.lpNorm<Eigen::Infinity>() > 0.0) {
        weights = est.U_hat.transpose().fullPivLu().solve(est.c_hat);
    }
    const Vector a = fd_den - s.ratio_den.cwiseProduct(s.eta_den * weights);
    const Vector b = fn_num + s.eta_num * weights;
    auto plug_in_variance = [](const Vector& v) { return (v.array() - v.mean()).square().mean(); };
    const double rho = data.rho();
    est.variance_estimate = (rho * plug_in_variance(a) + plug_in_variance(b)) / (1.0 + rho);
    return est;
}

DivergenceChoice divergence_choice_from_config(const FlatConfig& config) {
    DivergenceChoice choice;
    choice.kind = parse_divergence_kind(config.get_string("divergence", "kl"));
    choice.decomposition = parse_decomposition_kind(config.get_string("decomposition", "optimal"));
    if (choice.kind == DivergenceKind::Power) {
        choice.alpha = config.get_double("alpha");
    } else if (config.has("alpha")) {
        throw ConfigError("alpha is only valid for the power divergence");
    }
    // Validate eagerly so configuration errors surface before any data is read.
    (void)choice.instantiate(1.0);
    return choice;
}

AlternativeScenario gaussian_shift_scenario(double mu, int num_size, int den_size) {
    if (num_size < 1 || den_size < 1) throw InvalidArgument("sample sizes must be >= 1");
    AlternativeScenario scenario{RatioModel::exponential(FeatureMap::linear(1)), {}};
    scenario.generate = [mu, num_size, den_size](RngStream& rng) {
        Matrix num = sample_mvn_standard(rng, num_size, 1);
        num.array() += mu;
        Matrix den = sample_mvn_standard(rng, den_size, 1);
        return Dataset(std::move(num), std::move(den));
    };
    return scenario;
}

VarianceComparison decomposition_variance_compare(const AlternativeScenario& scenario, const DivergenceChoice& a,
                                                  const DivergenceChoice& b, int replicates,
                                                  std::uint64_t master_seed) {
    if (replicates < 2) throw InvalidArgument("variance comparison needs at least two replicates");
    std::vector<double> values_a, values_b;
    VarianceComparison out;
    for (int rep = 0; rep < replicates; ++rep) {
        RngStream rng = RngStream::keyed(master_seed, {0x5eedULL, static_cast<std::uint64_t>(rep)});
        const Dataset data = scenario.generate(rng);
        try {
            const FitResult fit_a = fit(data, scenario.model, a.eta);
            const FitResult fit_b = a.eta == b.eta ? fit_a : fit(data, scenario.model, b.eta);
            if (!fit_a.converged || !fit_b.converged) {
                ++out.invalid;
                continue;
            }
            const double va = estimate_divergence(data, scenario.model, a.instantiate(data.rho()), fit_a).value;
            const double vb = estimate_divergence(data, scenario.model, b.instantiate(data.rho()), fit_b).value;
            if (!std::isfinite(va) || !std::isfinite(vb)) {
                ++out.invalid;
                continue;
            }
            values_a.push_back(va);
            values_b.push_back(vb);
        } catch (const Error&) {
            ++out.invalid;
        }
    }
    out.replicates_used = static_cast<int>(values_a.size());
    if (out.replicates_used < 2) throw NotConverged("too few valid replicates for a variance comparison");
    auto moments = [](const std::vector<double>& v, double& mean, double& var) {
        const double n = static_cast<double>(v.size());
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= n;
        var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= (n - 1.0);
    };
    moments(values_a, out.mean_a, out.variance_a);
    moments(values_b, out.mean_b, out.variance_b);
    out.ratio = out.variance_a / out.variance_b;
    return out;
}

}  // namespace semidr
