#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semidr/dataset.hpp"
#include "semidr/flat_config.hpp"
#include "semidr/ratio_model.hpp"
#include "semidr/rng.hpp"

namespace semidr::simlab {

enum class Scenario { TypeI, MeanShift, ScaleShift, LocalAlternative, Misspecified };
enum class SimTest { MI, KL, EL, T2 };

const char* to_string(Scenario scenario);
const char* to_string(SimTest test);
Scenario parse_scenario(const std::string& name);
SimTest parse_test(const std::string& name);

/// Coordinate distribution of the base sample: standard normal or iid
/// Student-t with `df` degrees of freedom.
struct BaseDistribution {
    enum class Kind { Normal, StudentT };
    Kind kind = Kind::Normal;
    double df = 0.0;

    static BaseDistribution normal() { return {Kind::Normal, 0.0}; }
    static BaseDistribution student_t(double df) { return {Kind::StudentT, df}; }
    std::string name() const;
    Matrix sample(RngStream& rng, int n, int p) const;
};

BaseDistribution parse_base_distribution(const std::string& name, double df = 0.0);

struct SampleSize {
    int num = 0;
    int den = 0;
};

struct SimConfig {
    Scenario scenario = Scenario::TypeI;
    BaseDistribution base = BaseDistribution::normal();
    int p = 10;
    std::vector<SampleSize> sample_sizes;
    /// mu (MeanShift), sigma (ScaleShift), multiplier t of h_direction
    /// (LocalAlternative) or epsilon (Misspecified). Ignored by TypeI.
    std::vector<double> grid{0.0};
    int replicates = 300;
    double alpha = 0.05;
    std::vector<SimTest> tests{SimTest::MI, SimTest::KL, SimTest::EL, SimTest::T2};
    std::uint64_t master_seed = 1;
    /// Non-intercept coordinates of h for the p = 1 scenarios (model
    /// phi(x) = (1, x, x^2)).
    std::vector<double> h_direction{2.0, 1.0};
    /// Coefficient c of the mean-zero perturbation s(x) = c x^3 used by the
    /// misspecified scenario.
    double cubic = 0.5;

    /// Throws ConfigError on invalid settings.
    void validate() const;
    std::string canonical() const;
};

SimConfig config_from_flat(const FlatConfig& flat);

/// One grid point of a configuration.
struct SimCell {
    Scenario scenario = Scenario::TypeI;
    BaseDistribution base;
    int p = 10;
    SampleSize size;
    double grid_value = 0.0;
    std::vector<double> h_direction{2.0, 1.0};
    double cubic = 0.5;
};

std::vector<SimCell> expand_cells(const SimConfig& cfg);

/// Density-ratio model used for a cell: exponential link with
/// (1, x, x^2) features on R^p.
RatioModel cell_model(const SimCell& cell);

/// Parameters of the p = 1 local-alternative and misspecified numerator
/// density p(x) g(x) with p = N(0, 1):
///   g(x) = r(x; theta_m) [+ (c x^3 + epsilon) / sqrt(m), clipped at 0].
struct PerturbedDensity {
    /// theta_m with its intercept set so that g integrates to one against p.
    Vector theta;
    /// Limit local parameter: non-intercept part of h, intercept chosen
    /// so that E[grad r(x; 0)]^T h = -epsilon.
    Vector h;
    double epsilon = 0.0;
    double cubic = 0.0;
    double sqrt_m = 1.0;
    /// sup of g over a grid on [-10, 10].
    double envelope = 1.0;

    double weight(double x) const;
};

PerturbedDensity perturbed_density(const SimCell& cell);

/// Mean vector and second-moment matrix E[phi phi^T] of the (1, x, x^2)
/// features under N(0, 1), by quadrature.
void standard_normal_feature_moments(Vector& mean, Matrix& second_moment);

Dataset generate_pair(const SimCell& cell, RngStream& rng);

struct SimRow {
    Scenario scenario = Scenario::TypeI;
    std::string dist;
    int num = 0;
    int den = 0;
    double grid_value = 0.0;
    SimTest test = SimTest::MI;
    double rejection_rate = 0.0;
    int replicates_used = 0;
    int invalid_count = 0;
    /// sqrt(rate (1 - rate) / replicates_used).
    double mc_standard_error = 0.0;
};

struct SimReport {
    std::vector<SimRow> rows;
    std::uint64_t master_seed = 0;
    std::uint64_t config_hash = 0;
    double wall_seconds = 0.0;
};

/// Runs every cell x replicate with stream keyed by (seed, cell, replicate).
/// `threads` = 0 uses the hardware concurrency. The rows do not depend on
/// the thread count.
SimReport run(const SimConfig& cfg, unsigned threads = 1);

enum class TableFormat { Csv, Markdown };

/// Columns: scenario, dist, m_n, m_d, grid_value, test, rejection_rate,
/// mc_se, invalid_count.
std::string emit_table(const SimReport& report, TableFormat format);
/// Inverse of emit_table(..., Csv) for the emitted columns.
std::vector<SimRow> parse_csv_table(const std::string& text);

}  // namespace semidr::simlab
