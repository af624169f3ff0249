#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <vector>

#include "loopforge/harness.hpp"
#include "loopforge/io.hpp"
#include "loopforge/providers.hpp"

namespace loopforge {

/// Files of a dataset directory.
struct DatasetPaths {
    std::filesystem::path ground_truth;     // gt.tum
    std::filesystem::path odometry;         // odometry.graph
    std::filesystem::path odometry_tum;     // odometry.tum, the chained odometry
    std::filesystem::path locals;           // locals.lcdb
    std::filesystem::path correspondences;  // correspondences.txt
    std::filesystem::path world;            // world.json

    explicit DatasetPaths(const std::filesystem::path& dir);
};

/// Writes the synthetic dataset in the file formats `load_dataset` reads.
/// Correspondences are stored for every same-place frame pair.
void write_dataset(const std::filesystem::path& dir, const harness::SyntheticDataset& dataset,
                   const io::RunConfig& cfg);

struct LoadedDataset {
    std::vector<KeyframeInfo> keyframes;
    std::vector<LocalDescriptorSet> locals;
    std::unique_ptr<TableProviders> providers;
};

/// Reads locals.lcdb, odometry.graph and (if present) correspondences.txt.
LoadedDataset load_dataset(const std::filesystem::path& dir);

/// The configured vocabulary file, or one trained on `training` with
/// cfg.vocabulary_k centers when no path is set.
Vocabulary vocabulary_for(const PipelineConfig& cfg, std::span<const LocalDescriptorSet> training);

}  // namespace loopforge
