#pragma once

#include <map>
#include <utility>
#include <vector>

#include "loopforge/harness.hpp"
#include "loopforge/pipeline.hpp"

namespace loopforge {

/// Serves a synthetic dataset. Frame ids are sequence indices.
///
/// Correspondences for frames of the same place follow the world's
/// correspondence parameters; any other pair gets pure clutter.
class HarnessProviders final : public DescriptorProvider,
                               public CorrespondenceProvider,
                               public OdometryProvider {
public:
    explicit HarnessProviders(const harness::SyntheticDataset& dataset);

    LocalDescriptorSet local_descriptors(FrameId id) const override;
    std::vector<Correspondence> correspondences(FrameId query, FrameId match) const override;
    Sim3 initial_pose() const override;
    Sim3 relative(FrameId from, FrameId to) const override;

    std::vector<KeyframeInfo> keyframes() const;
    Providers providers() const { return {*this, *this, *this}; }

private:
    const harness::SyntheticDataset& dataset_;
};

/// Serves inputs loaded from files: local descriptors per frame, odometry
/// edges between consecutive keyframes, and a correspondence table. Pairs
/// absent from the table yield no correspondences.
class TableProviders final : public DescriptorProvider,
                             public CorrespondenceProvider,
                             public OdometryProvider {
public:
    TableProviders(std::map<FrameId, LocalDescriptorSet> locals, Sim3 initial,
                   std::map<std::pair<FrameId, FrameId>, Sim3> odometry,
                   std::map<std::pair<FrameId, FrameId>, std::vector<Correspondence>> correspondences);

    LocalDescriptorSet local_descriptors(FrameId id) const override;
    std::vector<Correspondence> correspondences(FrameId query, FrameId match) const override;
    Sim3 initial_pose() const override { return initial_; }
    Sim3 relative(FrameId from, FrameId to) const override;

    Providers providers() const { return {*this, *this, *this}; }

private:
    std::map<FrameId, LocalDescriptorSet> locals_;
    Sim3 initial_;
    std::map<std::pair<FrameId, FrameId>, Sim3> odometry_;
    std::map<std::pair<FrameId, FrameId>, std::vector<Correspondence>> correspondences_;
};

/// Seed of the synthetic correspondence set for a frame pair.
std::uint64_t correspondence_seed(std::uint64_t world_seed, FrameId query, FrameId match);

/// Every (later, earlier) pair of frames observing the same place.
std::vector<std::pair<FrameId, FrameId>> same_place_pairs(const harness::SyntheticDataset& dataset);

}  // namespace loopforge
