#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace shapval {

// Counter-based pseudo-random stream over a fixed 64-bit key. Draw i is a pure
// function of (key, i), so streams are reproducible regardless of which worker
// consumes them and two streams with distinct keys never share state.
class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64();
    // uniform on [0, 1)
    double next_double();
    // uniform on [0, bound), bound >= 1; rejection keeps the draw exactly uniform
    std::uint64_t next_below(std::uint64_t bound);
    double next_gaussian();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_gaussian_ = 0.0;
    bool has_spare_ = false;
};

// Hierarchical deterministic seeding. A node is identified by the master seed
// and the ordered list of (label, index) derivation steps; hashing folds the
// path into the internal state, so deriving the same path twice yields the
// same stream and sibling paths yield unrelated streams.
class SeedTree {
public:
    explicit SeedTree(std::uint64_t master_seed);

    SeedTree child(std::string_view label, std::uint64_t index = 0) const;
    Rng rng() const { return Rng(state_); }

    std::uint64_t master_seed() const { return master_; }
    std::uint64_t state() const { return state_; }
    // "label/index/label/index" derivation trail, for diagnostics
    const std::string& path() const { return path_; }

private:
    SeedTree(std::uint64_t master, std::uint64_t state, std::string path);

    std::uint64_t master_ = 0;
    std::uint64_t state_ = 0;
    std::string path_;
};

namespace detail {
// splitmix64 finalizer; full-period bijective scramble of the input word
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed);
}  // namespace detail

}  // namespace shapval
