#include "shapval/seed_tree.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace shapval {

namespace detail {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed) {
    // FNV-1a over the label bytes, then scrambled together with the seed
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(seed ^ mix64(h));
}

}  // namespace detail

std::uint64_t Rng::next_u64() {
    ++counter_;
    return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * counter_);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = (std::numeric_limits<std::uint64_t>::max() / bound) * bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
}

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_gaussian_;
    }
    // Box-Muller; u1 shifted away from zero so the log stays finite
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_gaussian_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

SeedTree::SeedTree(std::uint64_t master_seed)
    : master_(master_seed), state_(detail::mix64(master_seed)) {}

SeedTree::SeedTree(std::uint64_t master, std::uint64_t state, std::string path)
    : master_(master), state_(state), path_(std::move(path)) {}

SeedTree SeedTree::child(std::string_view label, std::uint64_t index) const {
    std::uint64_t s = detail::hash_bytes(label, state_);
    s = detail::mix64(s + index);
    std::string p = path_;
    if (!p.empty()) p += '/';
    p.append(label);
    p += '/';
    p += std::to_string(index);
    return SeedTree(master_, s, std::move(p));
}

}  // namespace shapval
