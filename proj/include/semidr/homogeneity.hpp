#pragma once

#include <optional>
#include <string>

#include "semidr/dataset.hpp"
#include "semidr/divergence.hpp"
#include "semidr/mm_estimator.hpp"
#include "semidr/ratio_model.hpp"

namespace semidr {

enum class TestFamily { DfBased, EmpiricalLikelihood, HotellingT2 };

const char* to_string(TestFamily family);

/// Decision of one homogeneity test. An outcome whose density-ratio fit did
/// not converge has valid = false, a NaN statistic and p-value, and
/// reject = false; callers must count it separately.
struct TestOutcome {
    TestFamily family = TestFamily::DfBased;
    double statistic = 0.0;
    double threshold = 0.0;
    double p_value = 1.0;
    bool reject = false;
    int dof = 0;
    bool valid = true;
};

/// Rejects H0: p_n = p_d when 2m D_f / f''(1) >= chi2_{d-1}(1 - alpha). The
/// ratio is fitted with the optimal estimating function and `div` must use
/// its optimal decomposition.
TestOutcome df_test(const Dataset& data, const RatioModel& model, const FDivergence& div, double alpha,
                    const SolverOptions& options = {});
/// Same test on an existing fit (which must use the optimal eta).
TestOutcome df_test(const Dataset& data, const RatioModel& model, const FDivergence& div, double alpha,
                    const FitResult& fit);

/// Score statistic S = m beta^T V_n[phi_2..phi_d] beta with beta the
/// non-intercept part of the optimal-eta fit and V_n the plug-in covariance of
/// the non-intercept features over the numerator sample. Exponential link only.
TestOutcome empirical_likelihood_test(const Dataset& data, const RatioModel& model, double alpha,
                                      const SolverOptions& options = {});
TestOutcome empirical_likelihood_test(const Dataset& data, const RatioModel& model, double alpha,
                                      const FitResult& fit);

/// Two-sample Hotelling T^2 with pooled covariance and the exact F threshold.
TestOutcome hotelling_t2_test(const Dataset& data, double alpha);

struct PowerPrediction {
    double noncentrality = 0.0;
    int dof = 0;
    double alpha = 0.0;
    double power = 0.0;
};

/// Pr{Y >= chi2_dof(1 - alpha)} with Y noncentral chi-square(dof, h^T M h).
/// When `mu` = E[grad r] is supplied, h must satisfy mu^T h = 0.
PowerPrediction power_prediction(const Vector& h, const Matrix& M, int dof, double alpha,
                                 const std::optional<Vector>& mu = std::nullopt);
PowerPrediction power_from_noncentrality(double noncentrality, int dof, double alpha);

}  // namespace semidr
