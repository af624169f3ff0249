#include "loopforge/descriptor_db.hpp"

#include <algorithm>
#include <mutex>
#include <string>

#include "loopforge/error.hpp"

namespace loopforge {

namespace {

bool ranks_before(const LoopCandidate& a, const LoopCandidate& b) {
    if (a.similarity != b.similarity) {
        return a.similarity > b.similarity;
    }
    return a.match_id < b.match_id;
}

}  // namespace

DescriptorDatabase::DescriptorDatabase(std::vector<KeyframeRecord> records) {
    for (auto& r : records) {
        insert(std::move(r));
    }
}

void DescriptorDatabase::insert(KeyframeRecord record) {
    std::unique_lock lock(mutex_);
    if (!records_.empty()) {
        const auto& last = records_.back();
        if (record.frame_id <= last.frame_id) {
            throw Error(ErrorCode::NonMonotonicFrameId,
                        "frame id " + std::to_string(record.frame_id) +
                            " is not greater than " + std::to_string(last.frame_id));
        }
        if (record.timestamp < last.timestamp) {
            throw Error(ErrorCode::NonMonotonicFrameId,
                        "timestamp of frame " + std::to_string(record.frame_id) + " goes backwards");
        }
    }
    records_.push_back(std::move(record));
}

std::vector<LoopCandidate> DescriptorDatabase::query_top_k(const GlobalDescriptor& query,
                                                           FrameId query_id, std::size_t k,
                                                           std::uint64_t exclusion_window) const {
    std::vector<LoopCandidate> scored;
    if (k == 0) {
        return scored;
    }
    {
        std::shared_lock lock(mutex_);
        scored.reserve(records_.size());
        for (const auto& r : records_) {
            if (frame_gap(query_id, r.frame_id) <= exclusion_window) {
                continue;
            }
            scored.push_back({query_id, r.frame_id, cosine_similarity(query, r.descriptor)});
        }
    }
    const std::size_t keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), ranks_before);
    scored.resize(keep);
    return scored;
}

void DescriptorDatabase::update_poses(const std::map<FrameId, Sim3>& poses) {
    std::unique_lock lock(mutex_);
    for (auto& r : records_) {
        if (auto it = poses.find(r.frame_id); it != poses.end()) {
            r.pose = it->second;
        }
    }
}

std::size_t DescriptorDatabase::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::optional<KeyframeRecord> DescriptorDatabase::find(FrameId id) const {
    std::shared_lock lock(mutex_);
    auto it = std::lower_bound(records_.begin(), records_.end(), id,
                               [](const KeyframeRecord& r, FrameId v) { return r.frame_id < v; });
    if (it == records_.end() || it->frame_id != id) {
        return std::nullopt;
    }
    return *it;
}

std::vector<KeyframeRecord> DescriptorDatabase::snapshot() const {
    std::shared_lock lock(mutex_);
    return records_;
}

std::optional<LoopCandidate> best_candidate(std::span<const LoopCandidate> ranked) {
    if (ranked.empty()) {
        return std::nullopt;
    }
    return ranked.front();
}

}  // namespace loopforge
