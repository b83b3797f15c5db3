#include "semidr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

#include "semidr/csv_io.hpp"
#include "semidr/divergence.hpp"
#include "semidr/errors.hpp"
#include "semidr/homogeneity.hpp"
#include "semidr/mm_estimator.hpp"
#include "semidr/ratio_model.hpp"
#include "semidr/simlab.hpp"

namespace semidr::cli {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Options {
    std::string num_path, den_path, model_path;
    std::string eta = "optimal";
    std::string divergence, decomposition = "optimal";
    double div_alpha = 0.0;
    std::string family;
    double alpha = 0.05;
    std::string config_path, out_path, format = "csv";
    std::optional<std::uint64_t> seed;
    int dof = 0;
    double ncp = 0.0;
};

/// Model from --model, or the exponential (1, x, x^2) model when absent. A
/// config without `p` takes the sample dimension.
RatioModel load_model(const std::string& path, int data_dim) {
    if (path.empty()) return RatioModel::exponential(FeatureMap::linear_quadratic(data_dim));
    auto config = FlatConfig::load(path);
    if (!config.has("p")) config.set("p", static_cast<double>(data_dim));
    auto model = model_from_config(config);
    if (model.input_dim() != data_dim) {
        throw DimensionMismatch("model expects dimension " + std::to_string(model.input_dim()) +
                                " but the samples have dimension " + std::to_string(data_dim));
    }
    return model;
}

Dataset load_data(const Options& o) {
    return Dataset(read_samples_csv_file(o.num_path), read_samples_csv_file(o.den_path));
}

EtaKind parse_eta(const std::string& name) {
    if (name == "optimal") return EtaKind::Optimal;
    if (name == "plain") return EtaKind::PlainGradient;
    throw InvalidArgument("unknown eta '" + name + "' (expected optimal or plain)");
}

int run_estimate(const Options& o, std::ostream& out) {
    const Dataset data = load_data(o);
    const RatioModel model = load_model(o.model_path, data.dim());
    const FitResult result = fit(data, model, parse_eta(o.eta));
    out << "model=" << model.describe() << "\n";
    out << "eta=" << to_string(result.eta) << "\n";
    out << "converged=" << (result.converged ? "true" : "false") << "\n";
    out << "iterations=" << result.iterations << "\n";
    out << "final_residual=" << num(result.final_residual) << "\n";
    out << "jacobian_condition=" << num(result.jacobian_condition) << "\n";
    for (Eigen::Index k = 0; k < result.theta_hat.size(); ++k) {
        out << "theta[" << k << "]=" << num(result.theta_hat(k)) << "\n";
    }
    if (!result.converged) throw NotConverged("density-ratio fit did not converge");
    const Matrix cov = theta_asymptotic_variance(data, model, result.eta, result.theta_hat);
    const double m = data.harmonic_size();
    for (Eigen::Index k = 0; k < cov.rows(); ++k) {
        out << "theta_se[" << k << "]=" << num(std::sqrt(std::max(0.0, cov(k, k)) / m)) << "\n";
    }
    if (!o.divergence.empty()) {
        const auto div = make_divergence(parse_divergence_kind(o.divergence), data.rho(), o.div_alpha,
                                         parse_decomposition_kind(o.decomposition));
        const auto est = estimate_divergence(data, model, div, result);
        out << "divergence=" << div.name() << "\n";
        out << "decomposition=" << to_string(div.decomposition()) << "\n";
        out << "divergence_value=" << num(est.value) << "\n";
        out << "divergence_se=" << num(std::sqrt(std::max(0.0, est.variance_estimate) / m)) << "\n";
    }
    return kExitOk;
}

int run_test(const Options& o, std::ostream& out) {
    const Dataset data = load_data(o);
    TestOutcome outcome;
    if (o.family == "t2") {
        outcome = hotelling_t2_test(data, o.alpha);
    } else {
        const RatioModel model = load_model(o.model_path, data.dim());
        if (o.family == "df") {
            const auto kind = parse_divergence_kind(o.divergence.empty() ? "kl" : o.divergence);
            outcome = df_test(data, model, make_divergence(kind, data.rho(), o.div_alpha), o.alpha);
        } else {
            outcome = empirical_likelihood_test(data, model, o.alpha);
        }
    }
    out << "family=" << to_string(outcome.family) << "\n";
    out << "statistic=" << num(outcome.statistic) << "\n";
    out << "dof=" << outcome.dof << "\n";
    out << "threshold=" << num(outcome.threshold) << "\n";
    out << "p_value=" << num(outcome.p_value) << "\n";
    out << "reject=" << (outcome.reject ? "true" : "false") << "\n";
    out << "valid=" << (outcome.valid ? "true" : "false") << "\n";
    if (!outcome.valid) throw NotConverged("density-ratio fit did not converge");
    return kExitOk;
}

unsigned threads_from_env() {
    const char* env = std::getenv("SEMIDR_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) throw InvalidArgument("SEMIDR_THREADS must be a nonnegative integer");
    return static_cast<unsigned>(v);
}

int run_simulate(const Options& o, std::ostream& out) {
    auto config = simlab::config_from_flat(FlatConfig::load(o.config_path));
    if (o.seed) config.master_seed = *o.seed;
    const auto format = o.format == "markdown" ? simlab::TableFormat::Markdown : simlab::TableFormat::Csv;
    const auto report = simlab::run(config, threads_from_env());
    write_text_file(o.out_path, simlab::emit_table(report, format));
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(report.config_hash));
    out << "out=" << o.out_path << "\n";
    out << "rows=" << report.rows.size() << "\n";
    out << "master_seed=" << report.master_seed << "\n";
    out << "config_hash=" << hash << "\n";
    out << "wall_seconds=" << num(report.wall_seconds) << "\n";
    return kExitOk;
}

int run_power(const Options& o, std::ostream& out) {
    const auto p = power_from_noncentrality(o.ncp, o.dof, o.alpha);
    out << "dof=" << p.dof << "\n";
    out << "noncentrality=" << num(p.noncentrality) << "\n";
    out << "alpha=" << num(p.alpha) << "\n";
    out << "power=" << num(p.power) << "\n";
    return kExitOk;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semiparametric density-ratio estimation and two-sample tests", "semidr"};
    app.require_subcommand(1);
    Options o;

    auto* estimate = app.add_subcommand("estimate", "Fit the density-ratio model and optionally a divergence");
    estimate->add_option("--num", o.num_path, "Numerator sample CSV")->required();
    estimate->add_option("--den", o.den_path, "Denominator sample CSV")->required();
    estimate->add_option("--model", o.model_path, "Model config file");
    estimate->add_option("--eta", o.eta, "Estimating function")->check(CLI::IsMember({"optimal", "plain"}));
    estimate->add_option("--divergence", o.divergence, "Divergence to estimate")
        ->check(CLI::IsMember({"kl", "mi", "power", "linear-kl"}));
    estimate->add_option("--decomposition", o.decomposition, "Divergence decomposition")
        ->check(CLI::IsMember({"optimal", "conjugate", "example"}));
    estimate->add_option("--div-alpha", o.div_alpha, "Exponent of the power divergence");

    auto* test = app.add_subcommand("test", "Two-sample homogeneity test");
    test->add_option("--family", o.family, "Test family")->required()->check(CLI::IsMember({"df", "el", "t2"}));
    test->add_option("--divergence", o.divergence, "Divergence for the df family")
        ->check(CLI::IsMember({"kl", "mi", "power", "linear-kl"}));
    test->add_option("--div-alpha", o.div_alpha, "Exponent of the power divergence");
    test->add_option("--alpha", o.alpha, "Significance level")->required();
    test->add_option("--model", o.model_path, "Model config file");
    test->add_option("--num", o.num_path, "Numerator sample CSV")->required();
    test->add_option("--den", o.den_path, "Denominator sample CSV")->required();

    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo configuration");
    simulate->add_option("--config", o.config_path, "Simulation config file")->required();
    simulate->add_option("--out", o.out_path, "Output table path")->required();
    simulate->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "markdown"}));
    simulate->add_option("--seed", o.seed, "Override the configured master seed");

    auto* power = app.add_subcommand("power", "Asymptotic power from a noncentrality");
    power->add_option("--dof", o.dof, "Degrees of freedom")->required();
    power->add_option("--ncp", o.ncp, "Noncentrality parameter")->required();
    power->add_option("--alpha", o.alpha, "Significance level")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (estimate->parsed()) return run_estimate(o, out);
        if (test->parsed()) return run_test(o, out);
        if (simulate->parsed()) return run_simulate(o, out);
        return run_power(o, out);
    } catch (const SingularJacobian& e) {
        err << "numerical failure: " << e.what() << " (condition " << num(e.condition()) << ")\n";
        return kExitNumerical;
    } catch (const NotConverged& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const SingularCovariance& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NonpositiveRatio& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const RejectionSamplingStall& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const MalformedCsv& e) {
        err << "error: " << e.what() << " (row " << e.row() << ", column " << e.column() << ")\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace semidr::cli
