#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace shapval {

// Runs body(0..count-1) across at most `workers` threads. Tasks must be
// independent and write only to their own slots; scheduling order is
// unspecified, so determinism comes from task identity, not execution order.
void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& body);

int hardware_workers();

// Neumaier compensated accumulation; used for every reduction that feeds a
// reported value so summation error stays near one ulp.
class StableSum {
public:
    void add(double value);
    double total() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

double stable_total(std::span<const double> values);
double stable_mean(std::span<const double> values);
// unbiased sample variance; 0 for fewer than two values
double sample_variance(std::span<const double> values, double mean);

}  // namespace shapval
