#include "semidr/rng.hpp"

#include <cmath>
#include <numbers>

#include "semidr/errors.hpp"

namespace semidr {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::uint64_t s = splitmix64(master_seed) ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL);
    std::uint32_t words[8];
    for (int i = 0; i < 4; ++i) {
        s = splitmix64(s);
        words[2 * i] = static_cast<std::uint32_t>(s);
        words[2 * i + 1] = static_cast<std::uint32_t>(s >> 32);
    }
    std::seed_seq seq(std::begin(words), std::end(words));
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id), engine_(seeded_engine(master_seed, stream_id)) {}

RngStream RngStream::keyed(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t id = 0x8A5CD789635D2DFFULL;
    for (auto key : path) id = splitmix64(id ^ splitmix64(key));
    return RngStream(master_seed, id);
}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) throw InvalidArgument("gamma shape must be positive");
    if (shape < 1.0) {
        // Boost to shape + 1 and rescale by U^(1/shape).
        const double u = 1.0 - uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double RngStream::student_t(double dof) {
    if (!(dof > 0.0)) throw InvalidDof("t distribution requires dof > 0");
    const double z = normal();
    return z / std::sqrt(chi_square(dof) / dof);
}

}  // namespace semidr
