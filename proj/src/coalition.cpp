#include "shapval/coalition.hpp"

#include <algorithm>
#include <string>

#include "shapval/errors.hpp"

namespace shapval {

Coalition::Coalition(std::vector<int> members, int n_players) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
        throw_config("duplicate-member", "coalition members must be unique");
    }
    if (!members_.empty()) {
        if (members_.front() < 0 || (n_players >= 0 && members_.back() >= n_players)) {
            throw_config("invalid-index", "coalition member outside [0, n)");
        }
    }
}

bool Coalition::contains(int point) const {
    return std::binary_search(members_.begin(), members_.end(), point);
}

Coalition Coalition::with(int point) const {
    if (contains(point)) {
        throw_config("duplicate-member",
                     "point " + std::to_string(point) + " already in coalition");
    }
    Coalition out;
    out.members_.reserve(members_.size() + 1);
    auto pos = std::lower_bound(members_.begin(), members_.end(), point);
    out.members_.insert(out.members_.end(), members_.begin(), pos);
    out.members_.push_back(point);
    out.members_.insert(out.members_.end(), pos, members_.end());
    return out;
}

void shuffle(std::vector<int>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = rng.next_below(i);
        std::swap(items[i - 1], items[j]);
    }
}

Coalition sample_coalition(const SeedTree& seeds, int n, int k, int exclude) {
    if (n < 1 || exclude < 0 || exclude >= n) {
        throw_config("invalid-index", "exclude point must lie in [0, n)");
    }
    if (k < 0 || k > n - 1) {
        throw_config("invalid-layer",
                     "layer " + std::to_string(k) + " not in [0, " + std::to_string(n - 1) + "]");
    }
    std::vector<int> pool;
    pool.reserve(n - 1);
    for (int i = 0; i < n; ++i) {
        if (i != exclude) pool.push_back(i);
    }
    Rng rng = seeds.rng();
    // partial Fisher-Yates: the first k entries are a uniform k-subset
    for (int i = 0; i < k; ++i) {
        const std::size_t j = i + rng.next_below(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return Coalition(std::move(pool), n);
}

std::vector<int> sample_permutation(const SeedTree& seeds, const Coalition& coalition) {
    std::vector<int> order = coalition.members();
    Rng rng = seeds.rng();
    shuffle(order, rng);
    return order;
}

std::vector<int> insert_into_sequence(std::vector<int> sequence, int point, const SeedTree& seeds) {
    if (std::find(sequence.begin(), sequence.end(), point) != sequence.end()) {
        throw_config("duplicate-member",
                     "point " + std::to_string(point) + " already in sequence");
    }
    Rng rng = seeds.rng();
    const std::size_t pos = rng.next_below(sequence.size() + 1);
    sequence.insert(sequence.begin() + pos, point);
    return sequence;
}

}  // namespace shapval
