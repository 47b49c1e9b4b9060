#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "shapval/coalition.hpp"
#include "shapval/dataset.hpp"
#include "shapval/model.hpp"
#include "shapval/sample_sizes.hpp"
#include "shapval/seed_tree.hpp"

namespace shapval {

// A valuation game over the training points. Implementations must be safe to
// call from many workers at once; `path` keys any per-evaluation randomness so
// results depend on task identity only.
class Game {
public:
    virtual ~Game() = default;

    virtual int player_count() const = 0;
    // utility v(S)
    virtual double value(const Coalition& coalition, const SeedTree& path) = 0;
    // v(S + point) - v(S); point must not be in S
    virtual double marginal(int point, const Coalition& base, const SeedTree& path);
    // marginal of each listed point against its predecessor set inside one
    // permutation of all players (cut values shared along the chain)
    virtual std::vector<double> permutation_marginals(std::span<const int> order,
                                                      std::span<const int> points,
                                                      const SeedTree& path, int workers);
    // marginal with an explicit permutation-sample count; games without
    // ordering randomness ignore h
    virtual double marginal_sampled(int point, const Coalition& base, const SeedTree& path,
                                    std::int64_t h) {
        (void)h;
        return marginal(point, base, path);
    }
    virtual bool expected_utility_mode() const { return false; }
    // permutation samples the theory asks for at layer k given m_k draws
    virtual std::int64_t suggested_h(int k, const AccuracyTarget& target, std::int64_t m_k) const {
        (void)k;
        (void)target;
        (void)m_k;
        return 1;
    }
    virtual std::uint64_t dataset_hash() const { return 0; }

    // executed utility evaluations (model trainings), cache hits excluded
    std::int64_t evaluations() const { return evaluations_.load(); }
    std::int64_t cache_hits() const { return cache_hits_.load(); }

protected:
    std::atomic<std::int64_t> evaluations_{0};
    std::atomic<std::int64_t> cache_hits_{0};
};

// Closed-form test game: utility given by a pure function of the coalition.
// Every call counts as an evaluation; nothing is cached.
class ClosedFormGame : public Game {
public:
    ClosedFormGame(int n, std::function<double(const Coalition&)> fn)
        : players_(n), fn_(std::move(fn)) {}

    int player_count() const override { return players_; }
    double value(const Coalition& coalition, const SeedTree&) override {
        evaluations_.fetch_add(1, std::memory_order_relaxed);
        return fn_(coalition);
    }

private:
    int players_;
    std::function<double(const Coalition&)> fn_;
};

// Compute-once concurrent memo: the first requester runs the computation,
// concurrent requesters for the same key wait on it and count as cache hits,
// so evaluation counts are independent of worker count.
class UtilityCache {
public:
    double get_or_compute(const std::vector<int>& key, const std::function<double()>& compute,
                          bool& was_hit);

private:
    struct VecHash {
        std::size_t operator()(const std::vector<int>& v) const;
    };
    std::mutex mutex_;
    std::unordered_map<std::vector<int>, std::shared_future<double>, VecHash> entries_;
};

enum class MarginalMode { FixedSubsequence, ExpectedUtility };

MarginalMode marginal_mode_from_string(const std::string& s);
std::string to_string(MarginalMode m);

// Model-backed utility: v(S) = -test_loss(train(S)). The strongly-convex
// regime trains by deterministic full-batch descent and caches by coalition;
// SGD regimes train on a fixed visit order drawn from the seed path and cache
// by the exact sequence. Caching is semantically invisible either way.
class ModelGame : public Game {
public:
    ModelGame(const Dataset& data, const TrainConfig& config,
              MarginalMode mode = MarginalMode::FixedSubsequence, int permutation_samples = 1);

    int player_count() const override { return data_->train_count(); }
    double value(const Coalition& coalition, const SeedTree& path) override;
    double marginal(int point, const Coalition& base, const SeedTree& path) override;
    std::vector<double> permutation_marginals(std::span<const int> order,
                                              std::span<const int> points, const SeedTree& path,
                                              int workers) override;
    double marginal_sampled(int point, const Coalition& base, const SeedTree& path,
                            std::int64_t h) override;
    bool expected_utility_mode() const override { return mode_ == MarginalMode::ExpectedUtility; }
    std::int64_t suggested_h(int k, const AccuracyTarget& target, std::int64_t m_k) const override;
    std::uint64_t dataset_hash() const override { return data_->content_hash(); }

    // v(S + point) - v(S) with both trainings sharing the base visit order of
    // S; the insertion slot for `point` is drawn once from the path
    double fixed_subsequence_marginal(int point, const Coalition& base, const SeedTree& path);
    // mean fixed-subsequence marginal over h independently seeded orderings;
    // the without-point run simply omits the point from the sequence
    double expected_marginal(int point, const Coalition& base, const SeedTree& path, int h);

    const TrainConfig& config() const { return config_; }
    const Dataset& data() const { return *data_; }
    MarginalMode mode() const { return mode_; }
    int permutation_samples() const { return h_; }

private:
    double set_value(const Coalition& coalition);
    double sequence_value(const std::vector<int>& sequence);

    const Dataset* data_;
    TrainConfig config_;
    MarginalMode mode_;
    int h_;
    UtilityCache cache_;
};

}  // namespace shapval
