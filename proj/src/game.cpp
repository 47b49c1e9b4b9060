#include "shapval/game.hpp"

#include <algorithm>

#include "shapval/errors.hpp"
#include "shapval/parallel.hpp"

namespace shapval {

double Game::marginal(int point, const Coalition& base, const SeedTree& path) {
    return value(base.with(point), path) - value(base, path);
}

std::vector<double> Game::permutation_marginals(std::span<const int> order,
                                                std::span<const int> points, const SeedTree& path,
                                                int workers) {
    (void)workers;
    const int n = static_cast<int>(order.size());
    std::vector<int> position(n, -1);
    for (int p = 0; p < n; ++p) position[order[p]] = p;

    // cut c is the coalition of the first c elements; marginal of the point at
    // slot p is v(cut p+1) - v(cut p)
    std::vector<bool> needed(n + 1, false);
    for (int pt : points) {
        const int p = position.at(pt);
        needed[p] = needed[p + 1] = true;
    }
    std::vector<double> cut_value(n + 1, 0.0);
    std::vector<int> prefix;
    prefix.reserve(n);
    for (int c = 0; c <= n; ++c) {
        if (c > 0) prefix.push_back(order[c - 1]);
        if (!needed[c]) continue;
        std::vector<int> sorted = prefix;
        cut_value[c] = value(Coalition(std::move(sorted)), path.child("cut", c));
    }
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int p = position.at(points[i]);
        out[i] = cut_value[p + 1] - cut_value[p];
    }
    return out;
}

std::size_t UtilityCache::VecHash::operator()(const std::vector<int>& v) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ v.size();
    for (int x : v) h = detail::mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)));
    return static_cast<std::size_t>(h);
}

double UtilityCache::get_or_compute(const std::vector<int>& key,
                                    const std::function<double()>& compute, bool& was_hit) {
    std::promise<double> promise;
    std::shared_future<double> future;
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            was_hit = true;
            future = it->second;
        } else {
            was_hit = false;
            future = promise.get_future().share();
            entries_.emplace(key, future);
        }
    }
    if (was_hit) return future.get();
    try {
        promise.set_value(compute());
    } catch (...) {
        promise.set_exception(std::current_exception());
    }
    return future.get();
}

MarginalMode marginal_mode_from_string(const std::string& s) {
    if (s == "fixed-subsequence") return MarginalMode::FixedSubsequence;
    if (s == "expected-utility") return MarginalMode::ExpectedUtility;
    throw_config("mode", "unknown marginal mode '" + s + "'");
}

std::string to_string(MarginalMode m) {
    return m == MarginalMode::FixedSubsequence ? "fixed-subsequence" : "expected-utility";
}

ModelGame::ModelGame(const Dataset& data, const TrainConfig& config, MarginalMode mode, int h)
    : data_(&data), config_(config), mode_(mode), h_(h) {
    config_.validate();
    data.validate();
    if (mode_ == MarginalMode::ExpectedUtility && !config_.is_sgd()) {
        throw_config("mode", "expected-utility mode requires an SGD regime");
    }
    if (h_ < 1) throw_config("config", "permutation_samples must be >= 1");
}

double ModelGame::set_value(const Coalition& coalition) {
    bool hit = false;
    const double v = cache_.get_or_compute(
        coalition.members(),
        [&]() {
            const ModelParams model = train_deterministic(coalition, *data_, config_);
            return -test_loss(model, *data_, config_.constants.loss_bound);
        },
        hit);
    (hit ? cache_hits_ : evaluations_).fetch_add(1, std::memory_order_relaxed);
    return v;
}

double ModelGame::sequence_value(const std::vector<int>& sequence) {
    bool hit = false;
    const double v = cache_.get_or_compute(
        sequence,
        [&]() {
            const ModelParams model = sgd_train(sequence, *data_, config_);
            return -test_loss(model, *data_, config_.constants.loss_bound);
        },
        hit);
    (hit ? cache_hits_ : evaluations_).fetch_add(1, std::memory_order_relaxed);
    return v;
}

double ModelGame::value(const Coalition& coalition, const SeedTree& path) {
    if (!config_.is_sgd()) return set_value(coalition);
    return sequence_value(sample_permutation(path.child("order"), coalition));
}

double ModelGame::fixed_subsequence_marginal(int point, const Coalition& base,
                                             const SeedTree& path) {
    if (!config_.is_sgd()) {
        return set_value(base.with(point)) - set_value(base);
    }
    const std::vector<int> base_order = sample_permutation(path.child("order"), base);
    const std::vector<int> with_point =
        insert_into_sequence(base_order, point, path.child("insert", static_cast<std::uint64_t>(point)));
    return sequence_value(with_point) - sequence_value(base_order);
}

double ModelGame::expected_marginal(int point, const Coalition& base, const SeedTree& path,
                                    int h) {
    if (h < 1) throw_config("config", "h must be >= 1");
    if (!config_.is_sgd()) {
        // no ordering randomness: every permutation sample is identical
        return fixed_subsequence_marginal(point, base, path);
    }
    StableSum sum;
    for (int j = 0; j < h; ++j) {
        sum.add(fixed_subsequence_marginal(point, base, path.child("rep", j)));
    }
    return sum.total() / h;
}

double ModelGame::marginal(int point, const Coalition& base, const SeedTree& path) {
    if (mode_ == MarginalMode::ExpectedUtility) return expected_marginal(point, base, path, h_);
    return fixed_subsequence_marginal(point, base, path);
}

double ModelGame::marginal_sampled(int point, const Coalition& base, const SeedTree& path,
                                   std::int64_t h) {
    if (mode_ != MarginalMode::ExpectedUtility) return marginal(point, base, path);
    return expected_marginal(point, base, path, static_cast<int>(std::min<std::int64_t>(h, 1 << 20)));
}

std::int64_t ModelGame::suggested_h(int k, const AccuracyTarget& target, std::int64_t m_k) const {
    if (mode_ != MarginalMode::ExpectedUtility || k < 1) return 1;
    if (config_.regime == Regime::NonconvexSgd && k < 2) return 1;
    const double eps = epsilon_for_regime(config_.regime, k, config_.constants, config_.schedule,
                                          config_.learning_rate);
    return h_permutations(eps, config_.constants, target, player_count(), std::max<std::int64_t>(m_k, 1));
}

std::vector<double> ModelGame::permutation_marginals(std::span<const int> order,
                                                     std::span<const int> points,
                                                     const SeedTree& path, int workers) {
    (void)path;  // the permutation itself fixes all randomness here
    const int n = static_cast<int>(order.size());
    std::vector<int> position(n, -1);
    for (int p = 0; p < n; ++p) position[order[p]] = p;

    std::vector<bool> needed(n + 1, false);
    for (int pt : points) {
        const int p = position.at(pt);
        needed[p] = needed[p + 1] = true;
    }
    std::vector<int> cuts;
    for (int c = 0; c <= n; ++c) {
        if (needed[c]) cuts.push_back(c);
    }

    std::vector<double> cut_value(n + 1, 0.0);
    const bool sgd = config_.is_sgd();
    parallel_for(static_cast<std::int64_t>(cuts.size()), workers, [&](std::int64_t idx) {
        const int c = cuts[static_cast<std::size_t>(idx)];
        std::vector<int> prefix(order.begin(), order.begin() + c);
        if (sgd) {
            // fixed-subsequence special case: pi(S) is the subsequence of the
            // global permutation, so the prefix is trained in permutation order
            cut_value[c] = sequence_value(prefix);
        } else {
            cut_value[c] = set_value(Coalition(std::move(prefix)));
        }
    });

    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int p = position.at(points[i]);
        out[i] = cut_value[p + 1] - cut_value[p];
    }
    return out;
}

}  // namespace shapval
