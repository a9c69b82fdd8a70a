// stats.hpp — Monte Carlo estimators and two-sample tests.

#pragma once

#include <cstddef>
#include <vector>

namespace siwf {

// Running sums for a (possibly weighted) sample of vectors. Two accumulators
// over disjoint samples merge by `merge`; merging in a fixed order gives
// reproducible results.
class WeightedAccumulator {
public:
    explicit WeightedAccumulator(std::size_t width = 0);

    void add(const std::vector<double>& x, double weight = 1.0);
    void merge(const WeightedAccumulator& other);

    std::size_t width() const noexcept { return swx_.size(); }
    std::size_t count() const noexcept { return count_; }
    double weight_sum() const noexcept { return sw_; }

    // Self-normalized mean sum w x / sum w.
    std::vector<double> mean() const;
    // Standard error of the mean; the unweighted case reduces to s / sqrt(n).
    std::vector<double> standard_error() const;

private:
    std::size_t count_ = 0;
    double sw_ = 0.0;
    double sw2_ = 0.0;
    std::vector<double> swx_;
    std::vector<double> sw2x_;
    std::vector<double> sw2x2_;
};

// Merges accumulators by pairwise (tree) reduction in index order.
WeightedAccumulator pairwise_merge(std::vector<WeightedAccumulator> parts);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Asymptotic critical value c(alpha) sqrt((n + m) / (n m)),
// c(alpha) = sqrt(-ln(alpha / 2) / 2).
double ks_critical_value(double alpha, std::size_t n, std::size_t m);

}  // namespace siwf
