#include "semidr/dataset.hpp"

#include <string>

#include "semidr/errors.hpp"

namespace semidr {

Dataset::Dataset(Matrix numerator, Matrix denominator)
    : numerator_(std::move(numerator)), denominator_(std::move(denominator)) {
    if (numerator_.rows() < 1 || denominator_.rows() < 1) {
        throw InvalidArgument("both samples must contain at least one observation");
    }
    if (numerator_.cols() != denominator_.cols()) {
        throw DimensionMismatch("numerator has " + std::to_string(numerator_.cols()) +
                                " columns but denominator has " + std::to_string(denominator_.cols()));
    }
    if (numerator_.cols() < 1) throw InvalidArgument("samples must have at least one column");
    if (!numerator_.allFinite() || !denominator_.allFinite()) {
        throw InvalidArgument("samples contain non-finite values");
    }
}

}  // namespace semidr
