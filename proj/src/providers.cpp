#include "loopforge/providers.hpp"

#include <string>

#include "loopforge/error.hpp"
#include "loopforge/seed.hpp"

namespace loopforge {

namespace {

constexpr std::uint64_t kCorrespondenceStream = 4;

void check_frame(const harness::SyntheticDataset& dataset, FrameId id) {
    if (id >= dataset.size()) {
        throw Error(ErrorCode::ProviderDesync, "frame " + std::to_string(id) + " is not in the dataset");
    }
}

}  // namespace

std::uint64_t correspondence_seed(std::uint64_t world_seed, FrameId query, FrameId match) {
    return derive_seed(world_seed, {kCorrespondenceStream, query, match});
}

std::vector<std::pair<FrameId, FrameId>> same_place_pairs(const harness::SyntheticDataset& dataset) {
    std::map<std::size_t, std::vector<FrameId>> frames_of;
    for (std::size_t i = 0; i < dataset.place_of.size(); ++i) {
        frames_of[dataset.place_of[i]].push_back(i);
    }
    std::vector<std::pair<FrameId, FrameId>> out;
    for (std::size_t i = 0; i < dataset.place_of.size(); ++i) {
        for (FrameId earlier : frames_of[dataset.place_of[i]]) {
            if (earlier >= i) break;
            out.emplace_back(i, earlier);
        }
    }
    return out;
}

HarnessProviders::HarnessProviders(const harness::SyntheticDataset& dataset) : dataset_(dataset) {}

LocalDescriptorSet HarnessProviders::local_descriptors(FrameId id) const {
    check_frame(dataset_, id);
    return dataset_.locals[id];
}

std::vector<Correspondence> HarnessProviders::correspondences(FrameId query, FrameId match) const {
    check_frame(dataset_, query);
    check_frame(dataset_, match);
    const auto& params = dataset_.config.correspondences;
    const double ratio = dataset_.same_place(query, match) ? params.outlier_ratio : 1.0;
    return harness::make_correspondences(dataset_, query, match, params.count, ratio, params.noise_sigma,
                                         correspondence_seed(dataset_.config.seed, query, match))
        .pairs;
}

Sim3 HarnessProviders::initial_pose() const {
    return dataset_.ground_truth.empty() ? Sim3::identity() : dataset_.ground_truth.front();
}

Sim3 HarnessProviders::relative(FrameId from, FrameId to) const {
    check_frame(dataset_, to);
    if (to != from + 1) {
        throw Error(ErrorCode::ProviderDesync, "odometry is only available between consecutive frames");
    }
    return dataset_.odometry[from];
}

std::vector<KeyframeInfo> HarnessProviders::keyframes() const {
    std::vector<KeyframeInfo> out;
    for (std::size_t i = 0; i < dataset_.size(); ++i) {
        out.push_back({i, dataset_.timestamps[i]});
    }
    return out;
}

TableProviders::TableProviders(std::map<FrameId, LocalDescriptorSet> locals, Sim3 initial,
                               std::map<std::pair<FrameId, FrameId>, Sim3> odometry,
                               std::map<std::pair<FrameId, FrameId>, std::vector<Correspondence>> correspondences)
    : locals_(std::move(locals)),
      initial_(initial),
      odometry_(std::move(odometry)),
      correspondences_(std::move(correspondences)) {}

LocalDescriptorSet TableProviders::local_descriptors(FrameId id) const {
    const auto it = locals_.find(id);
    if (it == locals_.end()) {
        throw Error(ErrorCode::ProviderDesync, "no local descriptors for frame " + std::to_string(id));
    }
    return it->second;
}

std::vector<Correspondence> TableProviders::correspondences(FrameId query, FrameId match) const {
    const auto it = correspondences_.find({query, match});
    return it == correspondences_.end() ? std::vector<Correspondence>{} : it->second;
}

Sim3 TableProviders::relative(FrameId from, FrameId to) const {
    const auto it = odometry_.find({from, to});
    if (it == odometry_.end()) {
        throw Error(ErrorCode::ProviderDesync,
                    "no odometry edge " + std::to_string(from) + " -> " + std::to_string(to));
    }
    return it->second;
}

}  // namespace loopforge
