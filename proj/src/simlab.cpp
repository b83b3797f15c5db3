#include "semidr/simlab.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <thread>

#include "semidr/divergence.hpp"
#include "semidr/errors.hpp"
#include "semidr/homogeneity.hpp"
#include "semidr/mm_estimator.hpp"
#include "semidr/statdist.hpp"

namespace semidr::simlab {

const char* to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::TypeI: return "type-i";
        case Scenario::MeanShift: return "mean-shift";
        case Scenario::ScaleShift: return "scale-shift";
        case Scenario::LocalAlternative: return "local-alternative";
        case Scenario::Misspecified: return "misspecified";
    }
    return "?";
}

const char* to_string(SimTest test) {
    switch (test) {
        case SimTest::MI: return "MI";
        case SimTest::KL: return "KL";
        case SimTest::EL: return "EL";
        case SimTest::T2: return "T2";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    for (auto s : {Scenario::TypeI, Scenario::MeanShift, Scenario::ScaleShift, Scenario::LocalAlternative,
                   Scenario::Misspecified}) {
        if (name == to_string(s)) return s;
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

SimTest parse_test(const std::string& name) {
    std::string upper = name;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (auto t : {SimTest::MI, SimTest::KL, SimTest::EL, SimTest::T2}) {
        if (upper == to_string(t)) return t;
    }
    throw ConfigError("unknown test '" + name + "'");
}

std::string BaseDistribution::name() const {
    if (kind == Kind::Normal) return "normal";
    std::ostringstream os;
    os << "t" << df;
    return os.str();
}

Matrix BaseDistribution::sample(RngStream& rng, int n, int p) const {
    return kind == Kind::Normal ? sample_mvn_standard(rng, n, p) : sample_iid_t(rng, n, p, df);
}

BaseDistribution parse_base_distribution(const std::string& name, double df) {
    if (name == "normal") return BaseDistribution::normal();
    if (name == "t10") return BaseDistribution::student_t(10.0);
    if (name == "t5") return BaseDistribution::student_t(5.0);
    if (name == "t") {
        if (!(df > 0.0)) throw ConfigError("dist = \"t\" requires df > 0");
        return BaseDistribution::student_t(df);
    }
    throw ConfigError("unknown distribution '" + name + "'");
}

void SimConfig::validate() const {
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    if (grid.empty()) throw ConfigError("grid must be nonempty");
    if (sample_sizes.empty()) throw ConfigError("sample_sizes must be nonempty");
    if (tests.empty()) throw ConfigError("tests must be nonempty");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (p < 1) throw ConfigError("p must be >= 1");
    for (const auto& s : sample_sizes) {
        if (s.num < 2 || s.den < 2) throw ConfigError("sample sizes must be >= 2");
    }
    if (base.kind == BaseDistribution::Kind::StudentT && !(base.df > 0.0)) throw ConfigError("t df must be > 0");
    if (scenario == Scenario::ScaleShift) {
        for (double s : grid) {
            if (!(s > 0.0)) throw ConfigError("scale-shift grid values must be > 0");
        }
    }
    if (scenario == Scenario::LocalAlternative || scenario == Scenario::Misspecified) {
        if (p != 1) throw ConfigError("local-alternative and misspecified scenarios require p = 1");
        if (base.kind != BaseDistribution::Kind::Normal) {
            throw ConfigError("local-alternative and misspecified scenarios require dist = \"normal\"");
        }
        if (h_direction.size() != 2) throw ConfigError("h_direction must have two entries (x and x^2 coordinates)");
    }
}

std::string SimConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "scenario=" << to_string(scenario) << ";dist=" << base.name() << ";p=" << p << ";sizes=";
    for (const auto& s : sample_sizes) os << s.num << "x" << s.den << ",";
    os << ";grid=";
    for (double g : grid) os << g << ",";
    os << ";replicates=" << replicates << ";alpha=" << alpha << ";tests=";
    for (auto t : tests) os << to_string(t) << ",";
    os << ";seed=" << master_seed << ";h=";
    for (double h : h_direction) os << h << ",";
    os << ";cubic=" << cubic;
    return os.str();
}

SimConfig config_from_flat(const FlatConfig& flat) {
    static constexpr std::array<std::string_view, 12> keys{
        "scenario", "dist", "df", "p", "sample_sizes", "grid", "replicates", "alpha", "tests", "seed",
        "h_direction", "cubic"};
    flat.require_known(keys);
    SimConfig cfg;
    cfg.scenario = parse_scenario(flat.get_string("scenario", "type-i"));
    cfg.base = parse_base_distribution(flat.get_string("dist", "normal"), flat.get_double("df", 0.0));
    const bool scalar_scenario =
        cfg.scenario == Scenario::LocalAlternative || cfg.scenario == Scenario::Misspecified;
    cfg.p = static_cast<int>(flat.get_int("p", scalar_scenario ? 1 : 10));
    if (!flat.has("sample_sizes")) throw ConfigError("missing config key 'sample_sizes'");
    const auto& sizes = flat.get("sample_sizes");
    if (auto nums = std::get_if<std::vector<double>>(&sizes)) {
        for (double n : *nums) cfg.sample_sizes.push_back({static_cast<int>(n), static_cast<int>(n)});
    } else if (auto n = std::get_if<double>(&sizes)) {
        cfg.sample_sizes.push_back({static_cast<int>(*n), static_cast<int>(*n)});
    } else {
        for (const auto& s : flat.get_strings("sample_sizes")) {
            int a = 0, b = 0;
            char sep = 0;
            std::istringstream is(s);
            if (!(is >> a >> sep >> b) || sep != 'x' || !is.eof()) {
                throw ConfigError("sample size '" + s + "' must look like \"500x1000\"");
            }
            cfg.sample_sizes.push_back({a, b});
        }
    }
    if (flat.has("grid")) cfg.grid = flat.get_doubles("grid");
    cfg.replicates = static_cast<int>(flat.get_int("replicates", cfg.replicates));
    cfg.alpha = flat.get_double("alpha", cfg.alpha);
    if (flat.has("tests")) {
        cfg.tests.clear();
        for (const auto& t : flat.get_strings("tests")) cfg.tests.push_back(parse_test(t));
    }
    const auto seed = flat.get_int("seed", 1);
    if (seed < 0) throw ConfigError("seed must be >= 0");
    cfg.master_seed = static_cast<std::uint64_t>(seed);
    if (flat.has("h_direction")) cfg.h_direction = flat.get_doubles("h_direction");
    cfg.cubic = flat.get_double("cubic", cfg.cubic);
    cfg.validate();
    return cfg;
}

std::vector<SimCell> expand_cells(const SimConfig& cfg) {
    std::vector<SimCell> cells;
    for (const auto& size : cfg.sample_sizes) {
        for (double g : cfg.grid) {
            SimCell cell;
            cell.scenario = cfg.scenario;
            cell.base = cfg.base;
            cell.p = cfg.p;
            cell.size = size;
            cell.grid_value = cfg.scenario == Scenario::TypeI ? 0.0 : g;
            cell.h_direction = cfg.h_direction;
            cell.cubic = cfg.cubic;
            cells.push_back(cell);
        }
    }
    return cells;
}

RatioModel cell_model(const SimCell& cell) {
    return RatioModel::exponential(FeatureMap::linear_quadratic(cell.p));
}

namespace {

constexpr double kQuadLimit = 12.0;
constexpr int kQuadNodes = 9601;

// Trapezoid rule against the N(0, 1) density on [-12, 12].
template <class F>
double normal_expectation(F&& g) {
    const double step = 2.0 * kQuadLimit / (kQuadNodes - 1);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    double sum = 0.0;
    for (int i = 0; i < kQuadNodes; ++i) {
        const double x = -kQuadLimit + step * i;
        const double w = (i == 0 || i == kQuadNodes - 1) ? 0.5 : 1.0;
        sum += w * norm * std::exp(-0.5 * x * x) * g(x);
    }
    return sum * step;
}

}  // namespace

void standard_normal_feature_moments(Vector& mean, Matrix& second_moment) {
    mean.resize(3);
    second_moment.resize(3, 3);
    std::array<double, 5> raw{};
    for (int k = 0; k < 5; ++k) {
        raw[k] = normal_expectation([k](double x) { return std::pow(x, k); });
    }
    for (int i = 0; i < 3; ++i) {
        mean(i) = raw[i];
        for (int j = 0; j < 3; ++j) second_moment(i, j) = raw[i + j];
    }
}

double PerturbedDensity::weight(double x) const {
    const double r = std::exp(theta(0) + theta(1) * x + theta(2) * x * x);
    if (cubic == 0.0 && epsilon == 0.0) return r;
    return std::max(0.0, r + (cubic * x * x * x + epsilon) / sqrt_m);
}

PerturbedDensity perturbed_density(const SimCell& cell) {
    if (cell.scenario != Scenario::LocalAlternative && cell.scenario != Scenario::Misspecified) {
        throw InvalidArgument("perturbed density is defined for the local-alternative scenarios only");
    }
    if (cell.h_direction.size() != 2) throw InvalidArgument("h_direction must have two entries");
    PerturbedDensity out;
    const double m = static_cast<double>(cell.size.num) * cell.size.den / (cell.size.num + cell.size.den);
    out.sqrt_m = std::sqrt(m);
    const bool misspecified = cell.scenario == Scenario::Misspecified;
    const double scale = misspecified ? 1.0 : cell.grid_value;
    out.epsilon = misspecified ? cell.grid_value : 0.0;
    out.cubic = misspecified ? cell.cubic : 0.0;

    out.h = Vector(3);
    out.h(1) = scale * cell.h_direction[0];
    out.h(2) = scale * cell.h_direction[1];
    Vector mu;
    Matrix second;
    standard_normal_feature_moments(mu, second);
    out.h(0) = -(mu(1) * out.h(1) + mu(2) * out.h(2)) - out.epsilon;

    out.theta = Vector::Zero(3);
    out.theta(1) = out.h(1) / out.sqrt_m;
    out.theta(2) = out.h(2) / out.sqrt_m;
    if (out.theta(2) >= 0.5) throw InvalidArgument("x^2 coefficient too large: p(x) r(x) is not integrable");
    const double mass = 1.0 - out.epsilon / out.sqrt_m;
    if (!(mass > 0.0)) throw InvalidArgument("epsilon / sqrt(m) must be < 1");
    const double b = out.theta(1), c = out.theta(2);
    const double integral = normal_expectation([b, c](double x) { return std::exp(b * x + c * x * x); });
    out.theta(0) = std::log(mass) - std::log(integral);

    double sup = 0.0;
    for (int i = 0; i <= 20000; ++i) sup = std::max(sup, out.weight(-10.0 + 1e-3 * i));
    out.envelope = sup;
    return out;
}

Dataset generate_pair(const SimCell& cell, RngStream& rng) {
    const int mn = cell.size.num, md = cell.size.den;
    switch (cell.scenario) {
        case Scenario::TypeI: {
            // Numerator first, as in every other scenario.
            Matrix num = cell.base.sample(rng, mn, cell.p);
            Matrix den = cell.base.sample(rng, md, cell.p);
            return Dataset(std::move(num), std::move(den));
        }
        case Scenario::MeanShift: {
            Matrix num = cell.base.sample(rng, mn, cell.p);
            Matrix den = cell.base.sample(rng, md, cell.p);
            den.array() += cell.grid_value;
            return Dataset(std::move(num), std::move(den));
        }
        case Scenario::ScaleShift: {
            Matrix num = cell.base.sample(rng, mn, cell.p);
            Matrix den = cell.base.sample(rng, md, cell.p) * cell.grid_value;
            return Dataset(std::move(num), std::move(den));
        }
        case Scenario::LocalAlternative:
        case Scenario::Misspecified: {
            if (cell.p != 1) throw InvalidArgument("local-alternative scenarios require p = 1");
            const PerturbedDensity density = perturbed_density(cell);
            if (1.0 / density.envelope < 1e-4) {
                throw RejectionSamplingStall("rejection sampler acceptance rate below 1e-4");
            }
            Matrix den = sample_mvn_standard(rng, md, 1);
            Matrix num(mn, 1);
            long long attempts = 0;
            for (int i = 0; i < mn;) {
                const double x = rng.normal();
                ++attempts;
                if (rng.uniform() * density.envelope < density.weight(x)) num(i++, 0) = x;
                if (attempts > 100000 && static_cast<double>(i) / attempts < 1e-4) {
                    throw RejectionSamplingStall("rejection sampler acceptance rate below 1e-4");
                }
            }
            return Dataset(std::move(num), std::move(den));
        }
    }
    throw InvalidArgument("unknown scenario");
}

namespace {

constexpr signed char kInvalid = -1;

struct CellContext {
    SimCell cell;
    RatioModel model;
    std::vector<SimTest> tests;
    double alpha;
    bool needs_fit;
};

void run_replicate(const CellContext& ctx, RngStream rng, signed char* out) {
    const auto n_tests = ctx.tests.size();
    std::fill(out, out + n_tests, kInvalid);
    std::optional<Dataset> data;
    try {
        data.emplace(generate_pair(ctx.cell, rng));
    } catch (const Error&) {
        return;
    }
    std::optional<FitResult> fit_result;
    if (ctx.needs_fit) {
        try {
            fit_result = fit(*data, ctx.model, EtaKind::Optimal);
        } catch (const Error&) {
        }
    }
    for (std::size_t k = 0; k < n_tests; ++k) {
        try {
            TestOutcome outcome;
            switch (ctx.tests[k]) {
                case SimTest::MI:
                case SimTest::KL: {
                    if (!fit_result) continue;
                    const auto kind = ctx.tests[k] == SimTest::MI ? DivergenceKind::MI : DivergenceKind::KL;
                    outcome = df_test(*data, ctx.model, make_divergence(kind, data->rho()), ctx.alpha, *fit_result);
                    break;
                }
                case SimTest::EL:
                    if (!fit_result) continue;
                    outcome = empirical_likelihood_test(*data, ctx.model, ctx.alpha, *fit_result);
                    break;
                case SimTest::T2:
                    outcome = hotelling_t2_test(*data, ctx.alpha);
                    break;
            }
            if (outcome.valid) out[k] = outcome.reject ? 1 : 0;
        } catch (const Error&) {
        }
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

SimReport run(const SimConfig& cfg, unsigned threads) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto cells = expand_cells(cfg);
    const bool needs_fit = std::any_of(cfg.tests.begin(), cfg.tests.end(), [](SimTest t) { return t != SimTest::T2; });

    std::vector<CellContext> contexts;
    contexts.reserve(cells.size());
    for (const auto& cell : cells) {
        contexts.push_back({cell, cell_model(cell), cfg.tests, cfg.alpha, needs_fit});
        if (cell.scenario == Scenario::LocalAlternative || cell.scenario == Scenario::Misspecified) {
            (void)perturbed_density(cell);  // surface parameter errors before running
        }
    }

    const std::size_t n_tests = cfg.tests.size();
    const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
    const std::size_t n_items = cells.size() * reps;
    std::vector<signed char> outcomes(n_items * n_tests, kInvalid);

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n_items)));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t item = next.fetch_add(1);
            if (item >= n_items) return;
            const std::size_t cell = item / reps;
            const std::size_t rep = item % reps;
            run_replicate(contexts[cell], RngStream::keyed(cfg.master_seed, {cell, rep}),
                          outcomes.data() + item * n_tests);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SimReport report;
    report.master_seed = cfg.master_seed;
    report.config_hash = fnv1a(cfg.canonical());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (std::size_t k = 0; k < n_tests; ++k) {
            SimRow row;
            row.scenario = cells[c].scenario;
            row.dist = cells[c].base.name();
            row.num = cells[c].size.num;
            row.den = cells[c].size.den;
            row.grid_value = cells[c].grid_value;
            row.test = cfg.tests[k];
            int rejects = 0;
            for (std::size_t r = 0; r < reps; ++r) {
                const signed char v = outcomes[(c * reps + r) * n_tests + k];
                if (v == kInvalid) {
                    ++row.invalid_count;
                } else {
                    ++row.replicates_used;
                    rejects += v;
                }
            }
            if (row.replicates_used > 0) {
                row.rejection_rate = static_cast<double>(rejects) / row.replicates_used;
                row.mc_standard_error =
                    std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) / row.replicates_used);
            } else {
                row.rejection_rate = std::numeric_limits<double>::quiet_NaN();
                row.mc_standard_error = std::numeric_limits<double>::quiet_NaN();
            }
            report.rows.push_back(row);
        }
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string format_rate(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

constexpr const char* kColumns[] = {"scenario", "dist", "m_n", "m_d", "grid_value",
                                    "test", "rejection_rate", "mc_se", "invalid_count"};

}  // namespace

std::string emit_table(const SimReport& report, TableFormat format) {
    std::ostringstream os;
    if (format == TableFormat::Csv) {
        for (std::size_t i = 0; i < std::size(kColumns); ++i) os << (i ? "," : "") << kColumns[i];
        os << "\n";
        for (const auto& row : report.rows) {
            os << to_string(row.scenario) << "," << row.dist << "," << row.num << "," << row.den << ","
               << format_number(row.grid_value) << "," << to_string(row.test) << ","
               << format_number(row.rejection_rate) << "," << format_number(row.mc_standard_error) << ","
               << row.invalid_count << "\n";
        }
        return os.str();
    }
    os << "|";
    for (const char* c : kColumns) os << " " << c << " |";
    os << "\n|";
    for (std::size_t i = 0; i < std::size(kColumns); ++i) os << (i < 2 || i == 5 ? " --- |" : " ---: |");
    os << "\n";
    for (const auto& row : report.rows) {
        os << "| " << to_string(row.scenario) << " | " << row.dist << " | " << row.num << " | " << row.den << " | "
           << format_short(row.grid_value) << " | " << to_string(row.test) << " | "
           << format_rate(row.rejection_rate) << " | " << format_rate(row.mc_standard_error) << " | "
           << row.invalid_count << " |\n";
    }
    return os.str();
}

std::vector<SimRow> parse_csv_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw MalformedCsv("empty table", 0, 0);
    std::vector<SimRow> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != std::size(kColumns)) {
            throw MalformedCsv("expected " + std::to_string(std::size(kColumns)) + " fields", row_no, fields.size());
        }
        SimRow row;
        try {
            row.scenario = parse_scenario(fields[0]);
            row.dist = fields[1];
            row.num = std::stoi(fields[2]);
            row.den = std::stoi(fields[3]);
            row.grid_value = std::strtod(fields[4].c_str(), nullptr);
            row.test = parse_test(fields[5]);
            row.rejection_rate = std::strtod(fields[6].c_str(), nullptr);
            row.mc_standard_error = std::strtod(fields[7].c_str(), nullptr);
            row.invalid_count = std::stoi(fields[8]);
        } catch (const std::exception& e) {
            throw MalformedCsv(std::string("cannot parse table row: ") + e.what(), row_no, 0);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace semidr::simlab
