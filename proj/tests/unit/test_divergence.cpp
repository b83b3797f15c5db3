#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "semidr/divergence.hpp"
#include "semidr/errors.hpp"
#include "semidr/statdist.hpp"

using namespace semidr;

namespace {

std::vector<FDivergence> catalog() {
    std::vector<FDivergence> out;
    for (auto dec : {DecompositionKind::Optimal, DecompositionKind::Conjugate, DecompositionKind::Example}) {
        out.push_back(make_divergence(DivergenceKind::KL, 1.0, 0.0, dec));
        for (double a : {-0.5, 1.0}) out.push_back(make_divergence(DivergenceKind::Power, 0.7, a, dec));
        if (dec == DecompositionKind::Conjugate) continue;
        for (double rho : {0.5, 1.0, 2.0}) out.push_back(make_divergence(DivergenceKind::MI, rho, 0.0, dec));
        out.push_back(make_divergence(DivergenceKind::LinearKL, 1.0, 0.0, dec));
    }
    return out;
}

Dataset gaussian_pair(std::uint64_t seed, int n, double mu) {
    RngStream rng(seed, 0);
    Matrix num = sample_mvn_standard(rng, n, 1);
    num.array() += mu;
    return Dataset(std::move(num), sample_mvn_standard(rng, n, 1));
}

}  // namespace

TEST_CASE("decomposition identity and normalization") {
    for (const auto& div : catalog()) {
        CAPTURE(div.name());
        CHECK(std::abs(div.f(1.0)) <= 1e-12);
        CHECK(std::abs(div.f_prime(1.0)) <= 1e-12);
        for (int i = 0; i < 200; ++i) {
            const double r = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
            const double f = div.f(r);
            CHECK(std::abs(div.f_d(r) + r * div.f_n(r) - f) <= 1e-10 * std::max(1.0, std::abs(f)));
            CHECK(div.f_double_prime(r) >= 0.0);
        }
    }
}

TEST_CASE("second derivative at one") {
    CHECK(make_divergence(DivergenceKind::KL, 1.0).f_double_prime_at_1() == 1.0);
    CHECK(make_divergence(DivergenceKind::MI, 1.0).f_double_prime_at_1() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(make_divergence(DivergenceKind::Power, 1.0, 1.0).f_double_prime_at_1() == doctest::Approx(2.0));
    for (const auto& div : catalog()) {
        CAPTURE(div.name());
        const double fd = oracle::second_derivative([&](double r) { return div.f(r); }, 1.0);
        CHECK(std::abs(div.f_double_prime_at_1() - fd) <= 1e-8);
        const double fp = oracle::central_difference([&](double r) { return div.f(r); }, 2.5);
        CHECK(std::abs(div.f_prime(2.5) - fp) <= 1e-7);
    }
}

TEST_CASE("stable evaluation at extreme ratios") {
    for (const auto& div : catalog()) {
        for (double r : {1e-12, 1e-8, 1e8, 1e12}) {
            CHECK(std::isfinite(div.f(r)));
            CHECK(std::isfinite(div.f_d(r)));
            CHECK(std::isfinite(div.f_n(r)));
        }
    }
}

TEST_CASE("construction errors and parsing") {
    CHECK_THROWS_AS(make_divergence(DivergenceKind::Power, 1.0, 0.0), InvalidAlpha);
    CHECK_THROWS_AS(make_divergence(DivergenceKind::Power, 1.0, -1.5), InvalidAlpha);
    CHECK_THROWS_AS(make_divergence(DivergenceKind::KL, 0.0), InvalidArgument);
    CHECK_THROWS_AS(make_divergence(DivergenceKind::MI, 1.0, 0.0, DecompositionKind::Conjugate), InvalidArgument);
    CHECK(parse_divergence_kind("linear-kl") == DivergenceKind::LinearKL);
    CHECK(parse_decomposition_kind("conjugate") == DecompositionKind::Conjugate);
    CHECK_THROWS_AS(parse_divergence_kind("hellinger"), InvalidArgument);
    const auto choice = divergence_choice_from_config(
        FlatConfig::parse("divergence = \"power\"\nalpha = 0.5\ndecomposition = \"example\"\n"));
    CHECK(choice.kind == DivergenceKind::Power);
    CHECK(choice.instantiate(1.0).decomposition() == DecompositionKind::Example);
}

TEST_CASE("estimate on identical samples is zero") {
    RngStream rng(31, 0);
    const Matrix x = sample_mvn_standard(rng, 400, 2);
    const Dataset data(x, x);
    const auto model = RatioModel::exponential(FeatureMap::linear_quadratic(2));
    const auto result = fit(data, model, EtaKind::Optimal);
    for (const auto& div : catalog()) {
        if (div.rho_dependent() && div.rho() != 1.0) continue;
        CHECK(std::abs(estimate_divergence(data, model, div, result).value) <= 1e-14);
    }
}

TEST_CASE("KL estimates agree with the quadrature value") {
    const Dataset data = gaussian_pair(32, 2000, 0.3);
    const auto model = RatioModel::exponential(FeatureMap::linear(1));
    const auto result = fit(data, model, EtaKind::Optimal);
    REQUIRE(result.converged);
    const double truth = oracle::simpson(
        [](double x) {
            const double r = oracle::normal_pdf(x, 0.3) / oracle::normal_pdf(x);
            return oracle::normal_pdf(x) * (r - 1.0 - std::log(r));
        },
        -12.0, 12.0);
    CHECK(truth == doctest::Approx(0.045).epsilon(1e-6));
    for (auto dec : {DecompositionKind::Optimal, DecompositionKind::Example}) {
        const auto est = estimate_divergence(data, model, make_divergence(DivergenceKind::KL, 1.0, 0.0, dec), result);
        CHECK(std::abs(est.value - truth) <= 0.02);
        CHECK(est.variance_estimate > 0.0);
    }
}

TEST_CASE("MI estimator has c = 0 and is small under the null") {
    const Dataset data = gaussian_pair(33, 1000, 0.0);
    const auto model = RatioModel::exponential(FeatureMap::linear_quadratic(1));
    const auto result = fit(data, model, EtaKind::Optimal);
    const auto est = estimate_divergence(data, model, make_divergence(DivergenceKind::MI, 1.0), result);
    CHECK(est.c_hat.lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(est.value <= 0.01);
}

TEST_CASE("estimator preconditions") {
    const Dataset data = gaussian_pair(34, 200, 0.0);
    const auto model = RatioModel::exponential(FeatureMap::linear(1));
    auto result = fit(data, model, EtaKind::Optimal);
    CHECK_THROWS_AS(estimate_divergence(data, model, make_divergence(DivergenceKind::MI, 2.0), result),
                    InvalidArgument);
    result.converged = false;
    CHECK_THROWS_AS(estimate_divergence(data, model, make_divergence(DivergenceKind::KL, 1.0), result), NotConverged);
}

TEST_CASE("estimates stay near nonnegative with a correct model") {
    const auto model = RatioModel::exponential(FeatureMap::linear(1));
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Dataset data = gaussian_pair(1000 + rep, 2000, 0.0);
        const auto result = fit(data, model, EtaKind::Optimal);
        REQUIRE(result.converged);
        for (const auto& div : catalog()) {
            if (div.rho_dependent() && div.rho() != 1.0) continue;
            worst = std::min(worst, estimate_divergence(data, model, div, result).value);
        }
    }
    CHECK(worst >= -0.01);
}

TEST_CASE("variance comparison") {
    const auto scenario = gaussian_shift_scenario(0.3, 500, 500);
    DivergenceChoice kl;
    const auto same = decomposition_variance_compare(scenario, kl, kl, 50);
    CHECK(same.ratio == 1.0);
    CHECK(same.replicates_used == 50);

    DivergenceChoice mi_opt{DivergenceKind::MI};
    DivergenceChoice mi_plain{DivergenceKind::MI};
    mi_plain.eta = EtaKind::PlainGradient;
    const auto mi = decomposition_variance_compare(scenario, mi_opt, mi_plain, 300);
    CHECK(mi.ratio >= 0.9);
    CHECK(mi.ratio <= 1.1);
}
