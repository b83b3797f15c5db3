// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// restrict the run to the listed criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "semidr/cli.hpp"
#include "semidr/csv_io.hpp"
#include "semidr/divergence.hpp"
#include "semidr/homogeneity.hpp"
#include "semidr/simlab.hpp"
#include "semidr/statdist.hpp"

using namespace semidr;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " FAILED[" << what << "]";
        }
    }
};

std::string fmt(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

double elapsed(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

double rate(const simlab::SimReport& report, double grid, simlab::SimTest test) {
    for (const auto& row : report.rows) {
        if (row.test == test && row.grid_value == grid) return row.rejection_rate;
    }
    return std::nan("");
}

int invalid_total(const simlab::SimReport& report) {
    int n = 0;
    for (const auto& row : report.rows) n += row.invalid_count;
    return n;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

// --- 1 -----------------------------------------------------------------------

void decomposition_identities(Verdict& v) {
    const auto start = std::chrono::steady_clock::now();
    struct Case {
        FDivergence div;
        double curvature;  // expected f''(1)
    };
    std::vector<Case> cases;
    for (auto dec : {DecompositionKind::Optimal, DecompositionKind::Conjugate, DecompositionKind::Example}) {
        cases.push_back({make_divergence(DivergenceKind::KL, 1.0, 0.0, dec), 1.0});
        for (double a : {-0.5, 1.0}) cases.push_back({make_divergence(DivergenceKind::Power, 1.0, a, dec), a + 1.0});
        if (dec == DecompositionKind::Conjugate) continue;
        for (double rho : {0.5, 1.0, 2.0}) {
            cases.push_back({make_divergence(DivergenceKind::MI, rho, 0.0, dec), rho / ((1 + rho) * (1 + rho))});
        }
        // LinearKL at rho = 1: f''(1) = 1/(1+rho)^2.
        cases.push_back({make_divergence(DivergenceKind::LinearKL, 1.0, 0.0, dec), 0.25});
    }
    double worst_identity = 0.0, worst_norm = 0.0, worst_curv = 0.0;
    for (const auto& c : cases) {
        for (int i = 0; i < 200; ++i) {
            const double r = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
            const double f = c.div.f(r);
            worst_identity =
                std::max(worst_identity, std::abs(c.div.f_d(r) + r * c.div.f_n(r) - f) / std::max(1.0, std::abs(f)));
        }
        worst_norm = std::max({worst_norm, std::abs(c.div.f(1.0)), std::abs(c.div.f_prime(1.0))});
        const double fd = oracle::second_derivative([&](double r) { return c.div.f(r); }, 1.0);
        worst_curv = std::max({worst_curv, std::abs(fd - c.curvature), std::abs(c.div.f_double_prime_at_1() - c.curvature)});
    }
    const double secs = elapsed(start);
    v.detail << cases.size() << " divergence/decomposition pairs; max identity err " << sci(worst_identity)
             << ", max |f(1)|,|f'(1)| " << sci(worst_norm) << ", max f''(1) err " << sci(worst_curv) << ", "
             << fmt(secs) << " s";
    v.require(worst_identity <= 1e-10, "identity");
    v.require(worst_norm <= 1e-12, "f(1)=f'(1)=0");
    v.require(worst_curv <= 1e-8, "f''(1)");
    v.require(secs < 1.0, "runtime");
}

// --- 2 -----------------------------------------------------------------------

void gradient_oracle(Verdict& v) {
    const auto start = std::chrono::steady_clock::now();
    const auto phi = FeatureMap::linear_quadratic(3);
    std::vector<std::pair<std::string, RatioModel>> models{
        {"exp", RatioModel::exponential(phi)},      {"linear", RatioModel::linear(phi)},
        {"power(-0.5)", RatioModel::power(phi, -0.5)}, {"power(0.5)", RatioModel::power(phi, 0.5)},
        {"power(2)", RatioModel::power(phi, 2.0)}};
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> z;
    double worst = 0.0;
    for (const auto& [name, model] : models) {
        int done = 0;
        while (done < 100) {
            Vector x(3), theta(7);
            for (auto& e : x) e = z(gen);
            for (auto& e : theta) e = 0.1 * z(gen);
            if (model.link() == Link::Linear) theta(0) += 2.0;
            const Vector f = phi.evaluate(x);
            const double t = theta.dot(f);
            // Keep draws well inside the domain of the link.
            if (model.link() == Link::Linear && t < 0.2) continue;
            if (model.link() == Link::Power && 1.0 + model.alpha() * t < 0.2) continue;
            const Vector g = grad_log_ratio(model, theta, x);
            Vector fd(7);
            for (int k = 0; k < 7; ++k) {
                fd(k) = oracle::central_difference(
                    [&](double s) {
                        Vector th = theta;
                        th(k) = s;
                        return std::log(eval_ratio(model, th, x));
                    },
                    theta(k));
            }
            worst = std::max(worst, (g - fd).lpNorm<Eigen::Infinity>() / std::max(1.0, fd.lpNorm<Eigen::Infinity>()));
            ++done;
        }
    }
    const double secs = elapsed(start);
    v.detail << "5 links x 100 draws; max rel err " << sci(worst) << ", " << fmt(secs) << " s";
    v.require(worst <= 1e-5, "gradient");
    v.require(secs < 1.0, "runtime");
}

// --- 3, 4, 5 -----------------------------------------------------------------

simlab::SimConfig ten_dim(simlab::Scenario scenario, const std::string& dist, int m, std::vector<double> grid) {
    simlab::SimConfig cfg;
    cfg.scenario = scenario;
    cfg.base = simlab::parse_base_distribution(dist);
    cfg.p = 10;
    cfg.sample_sizes = {{m, m}};
    cfg.grid = std::move(grid);
    cfg.replicates = 300;
    cfg.alpha = 0.05;
    cfg.master_seed = 20240601;
    return cfg;
}

void null_rates(Verdict& v) {
    using simlab::SimTest;
    const auto start = std::chrono::steady_clock::now();
    const auto normal = simlab::run(ten_dim(simlab::Scenario::TypeI, "normal", 1000, {0.0}));
    const auto t5 = simlab::run(ten_dim(simlab::Scenario::TypeI, "t5", 1000, {0.0}));
    const double mi = rate(normal, 0, SimTest::MI), kl = rate(normal, 0, SimTest::KL), el = rate(normal, 0, SimTest::EL);
    const double t_mi = rate(t5, 0, SimTest::MI), t_el = rate(t5, 0, SimTest::EL);
    const double secs = elapsed(start);
    v.detail << "normal MI " << fmt(mi) << " (0.053+-0.04), KL " << fmt(kl) << " (0.057+-0.04), EL " << fmt(el)
             << " (0.060+-0.04); t5 EL " << fmt(t_el) << " (>=0.10), MI " << fmt(t_mi) << " (<=0.11); invalid "
             << invalid_total(normal) + invalid_total(t5) << "; " << fmt(secs, 1) << " s";
    v.require(within(mi, 0.053, 0.04), "normal MI");
    v.require(within(kl, 0.057, 0.04), "normal KL");
    v.require(within(el, 0.060, 0.04), "normal EL");
    v.require(t_el >= 0.10, "t5 EL");
    v.require(t_mi <= 0.11, "t5 MI");
    v.require(secs < 600.0, "runtime");
}

void mean_shift_cells(Verdict& v) {
    using simlab::SimTest;
    const auto report = simlab::run(ten_dim(simlab::Scenario::MeanShift, "normal", 500, {0.0, 0.1, -0.1}));
    const double mi0 = rate(report, 0.0, SimTest::MI), mi1 = rate(report, 0.1, SimTest::MI);
    const double t2 = rate(report, -0.1, SimTest::T2);
    v.detail << "mu=0 MI " << fmt(mi0) << " (0.046+-0.05), mu=0.1 MI " << fmt(mi1) << " (0.866+-0.07), mu=-0.1 T2 "
             << fmt(t2) << " (0.964+-0.05)";
    v.require(within(mi0, 0.046, 0.05), "mu=0 MI");
    v.require(within(mi1, 0.866, 0.07), "mu=0.1 MI");
    v.require(within(t2, 0.964, 0.05), "mu=-0.1 T2");
}

void scale_shift_cells(Verdict& v) {
    using simlab::SimTest;
    const auto report = simlab::run(ten_dim(simlab::Scenario::ScaleShift, "normal", 500, {0.9, 1.1}));
    const double mi = rate(report, 1.1, SimTest::MI);
    const double t_lo = rate(report, 0.9, SimTest::T2), t_hi = rate(report, 1.1, SimTest::T2);
    v.detail << "sigma=1.1 MI " << fmt(mi) << " (0.992+-0.03); T2 sigma=0.9 " << fmt(t_lo) << ", sigma=1.1 "
             << fmt(t_hi) << " (<=0.12)";
    v.require(within(mi, 0.992, 0.03), "sigma=1.1 MI");
    v.require(t_lo <= 0.12, "sigma=0.9 T2");
    v.require(t_hi <= 0.12, "sigma=1.1 T2");
}

// --- 6 -----------------------------------------------------------------------

void null_law(Verdict& v) {
    simlab::SimConfig cfg;
    cfg.scenario = simlab::Scenario::TypeI;
    cfg.p = 1;
    cfg.sample_sizes = {{2000, 2000}};
    const auto cell = simlab::expand_cells(cfg).front();
    const auto model = simlab::cell_model(cell);
    const int reps = 500;
    std::vector<double> kl, mi;
    int invalid = 0;
    for (int rep = 0; rep < reps; ++rep) {
        auto rng = RngStream::keyed(606, {0, static_cast<std::uint64_t>(rep)});
        const Dataset data = simlab::generate_pair(cell, rng);
        const auto result = fit(data, model, EtaKind::Optimal);
        if (!result.converged) {
            ++invalid;
            continue;
        }
        kl.push_back(df_test(data, model, make_divergence(DivergenceKind::KL, data.rho()), 0.05, result).statistic);
        mi.push_back(df_test(data, model, make_divergence(DivergenceKind::MI, data.rho()), 0.05, result).statistic);
    }
    const auto cdf = [](double x) { return chi2_cdf(x, 2); };
    const double crit = ks_critical_value(kl.size(), 0.01);
    const double d_kl = ks_statistic(kl, cdf), d_mi = ks_statistic(mi, cdf);
    v.detail << "d=3, m_n=m_d=2000, " << reps << " reps; KS KL " << fmt(d_kl, 4) << ", MI " << fmt(d_mi, 4)
             << ", 1% critical " << fmt(crit, 4) << "; invalid " << invalid;
    v.require(d_kl < crit, "KL");
    v.require(d_mi < crit, "MI");
    v.require(invalid == 0, "fits");
}

// --- 7, 8 --------------------------------------------------------------------

void local_alternative(Verdict& v) {
    using simlab::SimTest;
    simlab::SimConfig cfg;
    cfg.scenario = simlab::Scenario::LocalAlternative;
    cfg.p = 1;
    cfg.sample_sizes = {{4000, 4000}};
    cfg.grid = {0.5, 1.0};
    cfg.replicates = 500;
    cfg.tests = {SimTest::MI, SimTest::KL, SimTest::EL};
    cfg.master_seed = 707;
    const auto report = simlab::run(cfg);
    Vector mu;
    Matrix M;
    simlab::standard_normal_feature_moments(mu, M);
    const auto cells = simlab::expand_cells(cfg);
    for (const auto& cell : cells) {
        const auto density = simlab::perturbed_density(cell);
        const double pred = power_prediction(density.h, M, 2, cfg.alpha, mu).power;
        const double mi = rate(report, cell.grid_value, SimTest::MI);
        const double kl = rate(report, cell.grid_value, SimTest::KL);
        const double el = rate(report, cell.grid_value, SimTest::EL);
        v.detail << " t=" << cell.grid_value << ": predicted " << fmt(pred) << ", MI " << fmt(mi) << ", KL " << fmt(kl)
                 << ", EL " << fmt(el) << ";";
        const std::string at = " t=" + fmt(cell.grid_value, 1);
        v.require(within(mi, pred, 0.06), "MI vs prediction" + at);
        v.require(within(kl, pred, 0.06), "KL vs prediction" + at);
        v.require(within(kl, mi, 0.06), "KL vs MI" + at);
        v.require(within(el, mi, 0.06), "EL vs MI" + at);
        v.require(within(el, kl, 0.06), "EL vs KL" + at);
    }
    v.detail << " invalid " << invalid_total(report);
}

void misspecified(Verdict& v) {
    using simlab::SimTest;
    simlab::SimConfig cfg;
    cfg.scenario = simlab::Scenario::Misspecified;
    cfg.p = 1;
    cfg.sample_sizes = {{1000, 1000}};
    cfg.grid = {0.5, 1.0, 2.0};
    cfg.h_direction = {1.0, 0.0};
    cfg.cubic = 0.5;
    cfg.replicates = 500;
    cfg.tests = {SimTest::MI, SimTest::KL, SimTest::EL};
    cfg.master_seed = 808;
    const auto report = simlab::run(cfg);
    for (double eps : cfg.grid) {
        const double mi = rate(report, eps, SimTest::MI), kl = rate(report, eps, SimTest::KL);
        const double el = rate(report, eps, SimTest::EL);
        v.detail << " eps=" << eps << ": MI " << fmt(mi) << ", KL " << fmt(kl) << ", EL " << fmt(el) << ";";
        v.require(mi >= el - 0.03, "MI eps=" + fmt(eps, 1));
        v.require(kl >= el - 0.03, "KL eps=" + fmt(eps, 1));
    }
    v.detail << " invalid " << invalid_total(report);
}

// --- 9 -----------------------------------------------------------------------

void optimal_variance(Verdict& v) {
    const auto scenario = gaussian_shift_scenario(0.3, 500, 500);
    DivergenceChoice optimal;
    DivergenceChoice conjugate;
    conjugate.decomposition = DecompositionKind::Conjugate;
    conjugate.eta = EtaKind::PlainGradient;
    const auto cmp = decomposition_variance_compare(scenario, optimal, conjugate, 300, 909);
    v.detail << "var(optimal, eta_opt) " << sci(cmp.variance_a) << ", var(conjugate, plain) " << sci(cmp.variance_b)
             << ", ratio " << fmt(cmp.ratio) << " (<=1.1); replicates " << cmp.replicates_used;
    v.require(cmp.ratio <= 1.1, "ratio");
    v.require(cmp.replicates_used == 300, "replicates");
}

// --- 10 ----------------------------------------------------------------------

void statdist_oracles(Verdict& v) {
    const double x = chi2_quantile(0.95, 20);
    double worst_nc = 0.0;
    for (double ncp : {0.0, 5.0, 10.0}) {
        const double mc = oracle::noncentral_chi2_sf_mc(x, 20, ncp, 1000000, 1000 + static_cast<unsigned>(ncp));
        const double series = noncentral_chi2_sf(x, 20, ncp);
        worst_nc = std::max(worst_nc, std::abs(mc - series));
        v.detail << "ncp=" << ncp << " series " << fmt(series, 4) << " mc " << fmt(mc, 4) << "; ";
    }
    double worst_rt = 0.0;
    for (int k : {1, 2, 5, 20, 50}) {
        for (int i = 1; i <= 99; ++i) {
            const double p = i / 100.0;
            worst_rt = std::max(worst_rt, std::abs(chi2_cdf(chi2_quantile(p, k), k) - p));
            worst_rt = std::max(worst_rt, std::abs(f_cdf(f_quantile(p, k, 30), k, 30) - p));
        }
    }
    v.detail << "max round trip " << sci(worst_rt) << "; ";
    v.require(worst_nc <= 0.003, "noncentral sf");
    v.require(worst_rt <= 1e-10, "round trip");
    for (double df : {10.0, 5.0}) {
        RngStream rng(1010, static_cast<std::uint64_t>(df));
        const int n = 100000;
        const Matrix t = sample_iid_t(rng, n, 1, df);
        std::vector<double> s(t.data(), t.data() + n);
        const double var = oracle::variance(s);
        const double m = oracle::mean(s);
        double m4 = 0.0;
        for (double e : s) m4 += std::pow(e - m, 4);
        m4 /= n;
        const double se = std::sqrt((m4 - var * var) / n);
        const double target = df / (df - 2.0);
        v.detail << "t" << df << " var " << fmt(var, 4) << " (" << fmt(target, 4) << ", 4se " << fmt(4 * se, 4) << "); ";
        v.require(within(var, target, 4.0 * se), "t variance df=" + fmt(df, 0));
    }
}

// --- 11 ----------------------------------------------------------------------

std::string simulate_once(const std::string& config, const std::string& out, const char* threads) {
    ::setenv("SEMIDR_THREADS", threads, 1);
    std::ostringstream o, e;
    const int code = cli::parse_and_dispatch({"simulate", "--config", config, "--out", out}, o, e);
    ::unsetenv("SEMIDR_THREADS");
    if (code != 0) return "exit " + std::to_string(code) + ": " + e.str();
    return read_text_file(out);
}

void determinism(Verdict& v) {
    const std::string dir = "acceptance_determinism";
    std::filesystem::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> configs{
        {"mean-shift", "scenario = \"mean-shift\"\ndist = \"t10\"\np = 3\nsample_sizes = [\"200x300\"]\n"
                       "grid = [0, 0.2]\nreplicates = 24\nseed = 11\n"},
        {"misspecified", "scenario = \"misspecified\"\nsample_sizes = [400]\ngrid = [1]\nreplicates = 16\nseed = 12\n"}};
    for (const auto& [name, text] : configs) {
        const std::string cfg = dir + "/" + name + ".toml";
        write_text_file(cfg, text);
        const auto a = simulate_once(cfg, dir + "/" + name + "_a.csv", "1");
        const auto b = simulate_once(cfg, dir + "/" + name + "_b.csv", "1");
        const auto c = simulate_once(cfg, dir + "/" + name + "_c.csv", "4");
        const bool same = a == b && b == c && a.rfind("scenario,", 0) == 0;
        v.detail << name << ": " << a.size() << " bytes, identical across runs and 1/4 threads = "
                 << (same ? "yes" : "no") << "; ";
        v.require(same, name);
    }
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* title;
        std::function<void(Verdict&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "decomposition identities", decomposition_identities},
        {2, "gradient oracle", gradient_oracle},
        {3, "null rejection rates, 10-dim, m=1000", null_rates},
        {4, "mean-shift spot cells, m=500", mean_shift_cells},
        {5, "scale-shift spot cells, m=500", scale_shift_cells},
        {6, "chi-square null law of the D_f statistic", null_law},
        {7, "local-alternative power", local_alternative},
        {8, "misspecified-model power ordering", misspecified},
        {9, "optimal decomposition variance", optimal_variance},
        {10, "distribution function oracles", statdist_oracles},
        {11, "simulate determinism", determinism},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        Verdict v;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " exception: " << e.what();
        }
        failures += !v.pass;
        std::printf("%s %2d  %s [%.1fs]: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.title, elapsed(start),
                    v.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
