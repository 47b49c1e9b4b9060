#pragma once

#include <span>
#include <vector>

#include "shapval/seed_tree.hpp"

namespace shapval {

// Subset of training-point indices in canonical form: strictly increasing,
// duplicate-free. The layer of a coalition is its cardinality.
class Coalition {
public:
    Coalition() = default;
    // sorts and validates; throws duplicate-member / invalid-index
    explicit Coalition(std::vector<int> members, int n_players = -1);

    static Coalition empty() { return Coalition(); }

    const std::vector<int>& members() const { return members_; }
    int layer() const { return static_cast<int>(members_.size()); }
    bool contains(int point) const;

    // canonical copy with `point` added; throws duplicate-member if present
    Coalition with(int point) const;

    bool operator==(const Coalition& other) const = default;

private:
    std::vector<int> members_;
};

// Uniformly random size-k subset of [0,n) excluding `exclude`; pure function
// of the seed node. k > n-1 is an invalid layer.
Coalition sample_coalition(const SeedTree& seeds, int n, int k, int exclude);

// Uniformly random visit order of the coalition members; empty in, empty out.
std::vector<int> sample_permutation(const SeedTree& seeds, const Coalition& coalition);

// Splice `point` into the sequence at a position drawn uniformly from
// [0, len]. The caller keys the seed node by (coalition sample, point) so the
// with-point and without-point trainings share the same base ordering.
std::vector<int> insert_into_sequence(std::vector<int> sequence, int point, const SeedTree& seeds);

// In-place Fisher-Yates over the whole vector.
void shuffle(std::vector<int>& items, Rng& rng);

}  // namespace shapval
