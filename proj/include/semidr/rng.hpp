#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace semidr {

/// Deterministic random stream identified by (master_seed, stream_id).
///
/// The engine state is derived by SplitMix64 hashing of the two keys, so
/// streams can be created in any order and on any thread and still produce
/// the same sequence. All variates are generated by code in this library
/// (not by the std distributions, whose output is implementation-defined).
/// A stream is single-owner; do not share one across threads.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    /// Stream keyed by a path of indices, e.g. {cell, replicate}.
    static RngStream keyed(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path);

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller.
    double normal();
    /// Gamma(shape, 1) via Marsaglia-Tsang.
    double gamma(double shape);
    double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }
    double student_t(double dof);

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace semidr
