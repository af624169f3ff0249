#include "loopforge/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "loopforge/error.hpp"

namespace loopforge {

double median(std::span<const double> values) {
    if (values.empty()) {
        throw Error(ErrorCode::InsufficientData, "median of an empty sequence");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    if (sorted.size() % 2 == 1) {
        return sorted[mid];
    }
    return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

AdaptiveThreshold::AdaptiveThreshold(ThresholdConfig cfg)
    : cfg_(cfg), max_thresh_(-std::numeric_limits<double>::infinity()) {
    if (cfg_.warmup_target == 0 || cfg_.window == 0) {
        throw Error(ErrorCode::InvalidConfig, "threshold warmup_target and window must be positive");
    }
    warmup_scores_.reserve(cfg_.warmup_target);
}

void AdaptiveThreshold::observe(double score) {
    if (!std::isfinite(score)) {
        throw Error(ErrorCode::NonFiniteScore, "similarity score must be finite");
    }
    ++observed_;
    if (!loop_thresh_) {
        warmup_scores_.push_back(score);
        if (warmup_scores_.size() == cfg_.warmup_target) {
            loop_thresh_ = median(warmup_scores_);
            max_thresh_ = *loop_thresh_;
            window_.assign(warmup_scores_.begin(), warmup_scores_.end());
            while (window_.size() > cfg_.window) {
                window_.pop_front();
            }
        }
        return;
    }
    window_.push_back(score);
    if (window_.size() > cfg_.window) {
        window_.pop_front();
    }
    const std::vector<double> current(window_.begin(), window_.end());
    loop_thresh_ = std::max(*loop_thresh_, median(current));
    max_thresh_ = *loop_thresh_;
}

bool AdaptiveThreshold::is_loop(double score) const {
    const auto thresh = loop_thresh();
    return thresh.has_value() && score >= *thresh;
}

std::optional<double> AdaptiveThreshold::loop_thresh() const {
    if (cfg_.fixed_threshold) {
        return cfg_.fixed_threshold;
    }
    return loop_thresh_;
}

}  // namespace loopforge
