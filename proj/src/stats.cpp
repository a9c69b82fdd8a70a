#include "siwf/stats.hpp"

#include "siwf/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace siwf {

WeightedAccumulator::WeightedAccumulator(std::size_t width)
    : swx_(width, 0.0), sw2x_(width, 0.0), sw2x2_(width, 0.0) {}

void WeightedAccumulator::add(const std::vector<double>& x, double weight) {
    if (x.size() != swx_.size()) throw DimensionError("WeightedAccumulator: sample width mismatch");
    ++count_;
    sw_ += weight;
    const double w2 = weight * weight;
    sw2_ += w2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        swx_[i] += weight * x[i];
        sw2x_[i] += w2 * x[i];
        sw2x2_[i] += w2 * x[i] * x[i];
    }
}

void WeightedAccumulator::merge(const WeightedAccumulator& other) {
    if (other.width() != width()) throw DimensionError("WeightedAccumulator: merge width mismatch");
    count_ += other.count_;
    sw_ += other.sw_;
    sw2_ += other.sw2_;
    for (std::size_t i = 0; i < swx_.size(); ++i) {
        swx_[i] += other.swx_[i];
        sw2x_[i] += other.sw2x_[i];
        sw2x2_[i] += other.sw2x2_[i];
    }
}

std::vector<double> WeightedAccumulator::mean() const {
    std::vector<double> m(swx_.size(), 0.0);
    if (sw_ == 0.0) return m;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = swx_[i] / sw_;
    return m;
}

std::vector<double> WeightedAccumulator::standard_error() const {
    std::vector<double> se(swx_.size(), 0.0);
    if (sw_ == 0.0 || count_ < 2) return se;
    // Delta-method variance of the ratio estimator, with the effective sample
    // size correction n_eff / (n_eff - 1).
    const double n_eff = sw_ * sw_ / sw2_;
    const double correction = n_eff > 1.0 ? n_eff / (n_eff - 1.0) : 0.0;
    const auto m = mean();
    for (std::size_t i = 0; i < se.size(); ++i) {
        const double ss = sw2x2_[i] - 2.0 * m[i] * sw2x_[i] + m[i] * m[i] * sw2_;
        se[i] = std::sqrt(std::max(0.0, ss) * correction) / sw_;
    }
    return se;
}

WeightedAccumulator pairwise_merge(std::vector<WeightedAccumulator> parts) {
    if (parts.empty()) return WeightedAccumulator{};
    while (parts.size() > 1) {
        std::vector<WeightedAccumulator> next;
        next.reserve((parts.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
            parts[i].merge(parts[i + 1]);
            next.push_back(std::move(parts[i]));
        }
        if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
        parts = std::move(next);
    }
    return std::move(parts.front());
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

}  // namespace siwf
