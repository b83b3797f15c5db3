#include "semidr/homogeneity.hpp"

#include <cmath>
#include <limits>

#include "semidr/errors.hpp"
#include "semidr/statdist.hpp"

namespace semidr {

const char* to_string(TestFamily family) {
    switch (family) {
        case TestFamily::DfBased: return "df";
        case TestFamily::EmpiricalLikelihood: return "el";
        case TestFamily::HotellingT2: return "t2";
    }
    return "?";
}

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidLevel("test level must lie in (0, 1)");
}

TestOutcome invalid_outcome(TestFamily family, int dof, double threshold) {
    TestOutcome out;
    out.family = family;
    out.dof = dof;
    out.threshold = threshold;
    out.statistic = std::numeric_limits<double>::quiet_NaN();
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    out.reject = false;
    out.valid = false;
    return out;
}

TestOutcome chi2_decision(TestFamily family, double statistic, int dof, double alpha) {
    TestOutcome out;
    out.family = family;
    out.dof = dof;
    out.statistic = statistic;
    out.threshold = chi2_quantile(1.0 - alpha, dof);
    out.p_value = chi2_sf(statistic, dof);
    out.reject = statistic >= out.threshold;
    return out;
}

int null_dof(const RatioModel& model) {
    const int dof = model.parameter_dim() - 1;
    if (dof < 1) throw InvalidDof("homogeneity tests need a model with at least one non-intercept feature");
    return dof;
}

}  // namespace

TestOutcome df_test(const Dataset& data, const RatioModel& model, const FDivergence& div, double alpha,
                    const SolverOptions& options) {
    check_alpha(alpha);
    null_dof(model);
    return df_test(data, model, div, alpha, fit(data, model, EtaKind::Optimal, options));
}

TestOutcome df_test(const Dataset& data, const RatioModel& model, const FDivergence& div, double alpha,
                    const FitResult& fit) {
    check_alpha(alpha);
    const int dof = null_dof(model);
    if (div.decomposition() != DecompositionKind::Optimal) {
        throw InvalidArgument("the D_f-based test requires the optimal decomposition");
    }
    if (fit.eta != EtaKind::Optimal) throw InvalidArgument("the D_f-based test requires the optimal eta");
    const double curvature = div.f_double_prime_at_1();
    if (!(curvature > 0.0)) throw InvalidArgument("f''(1) must be positive");
    if (!fit.converged) return invalid_outcome(TestFamily::DfBased, dof, chi2_quantile(1.0 - alpha, dof));
    const DivergenceEstimate est = estimate_divergence(data, model, div, fit);
    const double statistic = 2.0 * data.harmonic_size() * est.value / curvature;
    return chi2_decision(TestFamily::DfBased, statistic, dof, alpha);
}

TestOutcome empirical_likelihood_test(const Dataset& data, const RatioModel& model, double alpha,
                                      const SolverOptions& options) {
    check_alpha(alpha);
    null_dof(model);
    if (model.link() != Link::Exponential) throw InvalidArgument("the empirical likelihood test needs the exponential link");
    return empirical_likelihood_test(data, model, alpha, fit(data, model, EtaKind::Optimal, options));
}

TestOutcome empirical_likelihood_test(const Dataset& data, const RatioModel& model, double alpha,
                                      const FitResult& fit) {
    check_alpha(alpha);
    const int dof = null_dof(model);
    if (model.link() != Link::Exponential) throw InvalidArgument("the empirical likelihood test needs the exponential link");
    if (fit.eta != EtaKind::Optimal) throw InvalidArgument("the empirical likelihood test requires the optimal eta");
    if (!fit.converged) return invalid_outcome(TestFamily::EmpiricalLikelihood, dof, chi2_quantile(1.0 - alpha, dof));

    const Matrix phi = model.features().evaluate_rows(data.numerator());
    const Matrix cov = sample_covariance(phi.rightCols(dof));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
    const double largest = eig.eigenvalues().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, largest))) {
        throw SingularCovariance("covariance of the non-intercept features is singular");
    }
    const Vector beta = fit.theta_hat.tail(dof);
    const double statistic = data.harmonic_size() * beta.dot(cov * beta);
    return chi2_decision(TestFamily::EmpiricalLikelihood, statistic, dof, alpha);
}

TestOutcome hotelling_t2_test(const Dataset& data, double alpha) {
    check_alpha(alpha);
    const auto n1 = data.num_size();
    const auto n2 = data.den_size();
    const int p = data.dim();
    const auto n = n1 + n2;
    if (n <= p + 1) throw SingularCovariance("Hotelling T^2 needs m_n + m_d > p + 1");

    const Vector mean1 = data.numerator().colwise().mean().transpose();
    const Vector mean2 = data.denominator().colwise().mean().transpose();
    const Matrix c1 = data.numerator().rowwise() - mean1.transpose();
    const Matrix c2 = data.denominator().rowwise() - mean2.transpose();
    const Matrix pooled = (c1.transpose() * c1 + c2.transpose() * c2) / static_cast<double>(n - 2);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(pooled, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff()))) {
        throw SingularCovariance("pooled covariance is singular");
    }
    const Vector diff = mean1 - mean2;
    const double scale = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n);
    const double t2 = scale * diff.dot(pooled.ldlt().solve(diff));

    const int d2 = static_cast<int>(n - p - 1);
    const double to_f = static_cast<double>(d2) / (static_cast<double>(p) * static_cast<double>(n - 2));
    TestOutcome out;
    out.family = TestFamily::HotellingT2;
    out.dof = p;
    out.statistic = t2;
    out.threshold = f_quantile(1.0 - alpha, p, d2) / to_f;
    out.p_value = f_sf(t2 * to_f, p, d2);
    out.reject = t2 >= out.threshold;
    return out;
}

PowerPrediction power_from_noncentrality(double noncentrality, int dof, double alpha) {
    check_alpha(alpha);
    if (!(noncentrality >= 0.0)) throw InvalidArgument("noncentrality must be >= 0");
    PowerPrediction out;
    out.noncentrality = noncentrality;
    out.dof = dof;
    out.alpha = alpha;
    out.power = noncentral_chi2_sf(chi2_quantile(1.0 - alpha, dof), dof, noncentrality);
    return out;
}

PowerPrediction power_prediction(const Vector& h, const Matrix& M, int dof, double alpha,
                                 const std::optional<Vector>& mu) {
    check_alpha(alpha);
    if (M.rows() != M.cols() || M.rows() != h.size()) throw DimensionMismatch("M must be square and match h");
    if (!M.isApprox(M.transpose(), 1e-10)) throw InvalidArgument("M must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
    const double largest = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-10 * largest) throw InvalidArgument("M must be positive semidefinite");
    if (mu) {
        if (mu->size() != h.size()) throw DimensionMismatch("mu must match h");
        if (std::abs(mu->dot(h)) > 1e-8 * (1.0 + mu->norm() * h.norm())) {
            throw InvalidArgument("h must satisfy E[grad r]^T h = 0");
        }
    }
    const double ncp = std::max(0.0, h.dot(M * h));
    return power_from_noncentrality(ncp, dof, alpha);
}

}  // namespace semidr
