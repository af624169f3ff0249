#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace loopforge {

struct ThresholdConfig {
    std::size_t warmup_target = 5;
    std::size_t window = 20;
    /// When set, replaces the adaptive rule entirely.
    std::optional<double> fixed_threshold;
};

/// Median of a non-empty sequence; the mean of the two middle values for even sizes.
double median(std::span<const double> values);

/// Adaptive loop-closure similarity threshold.
///
/// The first `warmup_target` valid top-1 scores are collected and their median
/// becomes loop_thresh. Afterwards every score enters a rolling window (seeded
/// with the warmup scores) and loop_thresh is raised to the window median
/// whenever that median exceeds it, so it never decreases.
class AdaptiveThreshold {
public:
    explicit AdaptiveThreshold(ThresholdConfig cfg = {});

    /// Throws NonFiniteScore for NaN or infinite scores.
    void observe(double score);

    bool is_loop(double score) const;

    std::optional<double> loop_thresh() const;
    double max_thresh() const { return max_thresh_; }
    std::size_t observed() const { return observed_; }
    bool warmed_up() const { return loop_thresh_.has_value(); }
    const ThresholdConfig& config() const { return cfg_; }

private:
    ThresholdConfig cfg_;
    std::vector<double> warmup_scores_;
    std::deque<double> window_;
    std::optional<double> loop_thresh_;
    double max_thresh_;
    std::size_t observed_ = 0;
};

}  // namespace loopforge
