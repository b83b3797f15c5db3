#pragma once

#include "semidr/types.hpp"

namespace semidr {

/// Two independent samples: rows of `numerator` from p_n, rows of
/// `denominator` from p_d. Both must be nonempty and share their width.
class Dataset {
public:
    Dataset(Matrix numerator, Matrix denominator);

    const Matrix& numerator() const noexcept { return numerator_; }
    const Matrix& denominator() const noexcept { return denominator_; }

    Eigen::Index num_size() const noexcept { return numerator_.rows(); }
    Eigen::Index den_size() const noexcept { return denominator_.rows(); }
    int dim() const noexcept { return static_cast<int>(numerator_.cols()); }

    /// m_n / m_d.
    double rho() const noexcept { return static_cast<double>(num_size()) / static_cast<double>(den_size()); }
    /// Harmonic sample size m_n m_d / (m_n + m_d).
    double harmonic_size() const noexcept {
        const double mn = static_cast<double>(num_size());
        const double md = static_cast<double>(den_size());
        return mn * md / (mn + md);
    }

private:
    Matrix numerator_;
    Matrix denominator_;
};

}  // namespace semidr
