#include "shapval/parallel.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace shapval {

int hardware_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& body) {
    if (count <= 0) return;
    if (workers <= 0) workers = hardware_workers();
    const int threads = static_cast<int>(std::min<std::int64_t>(workers, count));
    if (threads <= 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&]() {
        while (true) {
            const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                // keep draining indices so the pool winds down quickly
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

void StableSum::add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
        compensation_ += (sum_ - t) + value;
    } else {
        compensation_ += (value - t) + sum_;
    }
    sum_ = t;
}

double stable_total(std::span<const double> values) {
    StableSum s;
    for (double v : values) s.add(v);
    return s.total();
}

double stable_mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return stable_total(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values, double mean) {
    if (values.size() < 2) return 0.0;
    StableSum s;
    for (double v : values) s.add((v - mean) * (v - mean));
    return s.total() / static_cast<double>(values.size() - 1);
}

}  // namespace shapval
