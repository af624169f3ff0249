#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "loopforge/descriptors.hpp"
#include "loopforge/geometry.hpp"

namespace loopforge {

using FrameId = std::uint64_t;

struct KeyframeRecord {
    FrameId frame_id = 0;
    double timestamp = 0.0;
    GlobalDescriptor descriptor;
    Sim3 pose;
};

struct LoopCandidate {
    FrameId query_id = 0;
    FrameId match_id = 0;
    double similarity = 0.0;

    bool operator==(const LoopCandidate&) const = default;
};

inline std::uint64_t frame_gap(FrameId a, FrameId b) { return a > b ? a - b : b - a; }

/// Keyframe database with exact (linear scan) retrieval.
///
/// Single writer, many readers: insert() and update_poses() take an exclusive
/// lock, queries take a shared lock, so a query never observes a half-inserted
/// record.
class DescriptorDatabase {
public:
    DescriptorDatabase() = default;
    explicit DescriptorDatabase(std::vector<KeyframeRecord> records);

    DescriptorDatabase(const DescriptorDatabase&) = delete;
    DescriptorDatabase& operator=(const DescriptorDatabase&) = delete;

    /// Throws NonMonotonicFrameId unless record.frame_id exceeds every stored id
    /// (and its timestamp does not go backwards).
    void insert(KeyframeRecord record);

    /// Candidates with |query_id - match_id| > exclusion_window, ranked by cosine
    /// similarity (descending, ties to the lower match id), truncated to k.
    std::vector<LoopCandidate> query_top_k(const GlobalDescriptor& query, FrameId query_id,
                                           std::size_t k, std::uint64_t exclusion_window) const;

    void update_poses(const std::map<FrameId, Sim3>& poses);

    std::size_t size() const;
    std::optional<KeyframeRecord> find(FrameId id) const;
    std::vector<KeyframeRecord> snapshot() const;

private:
    mutable std::shared_mutex mutex_;
    std::vector<KeyframeRecord> records_;
};

std::optional<LoopCandidate> best_candidate(std::span<const LoopCandidate> ranked);

}  // namespace loopforge
