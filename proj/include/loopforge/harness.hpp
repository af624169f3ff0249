#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loopforge/descriptors.hpp"
#include "loopforge/geometry.hpp"
#include "loopforge/pose_graph.hpp"
#include "loopforge/verification.hpp"

namespace loopforge::harness {

enum class TrajectoryShape { Square, FigureEight, Corridor };

std::string to_string(TrajectoryShape shape);
TrajectoryShape parse_shape(const std::string& name);

/// Per-step odometry noise, applied as a right-multiplied exp() of a Gaussian
/// tangent vector (translation sigma, rotation sigma in rad, log-scale sigma).
struct DriftParams {
    double rotation_sigma = 0.0;
    double translation_sigma = 0.0;
    double scale_sigma = 0.0;
};

/// Each place owns `signatures_per_place` random directions scaled to norm
/// `separation`; a frame of that place emits `locals_per_signature` noisy
/// copies (per-component sigma `noise_sigma`) of every signature.
struct PlaceParams {
    std::size_t descriptor_dim = 16;
    std::size_t signatures_per_place = 8;
    std::size_t locals_per_signature = 4;
    double noise_sigma = 0.1;
    double separation = 1.0;
};

struct CorrespondenceParams {
    std::size_t count = 200;
    double outlier_ratio = 0.3;
    double noise_sigma = 0.01;
};

struct WorldConfig {
    TrajectoryShape shape = TrajectoryShape::Square;
    std::size_t keyframes = 400;
    /// Frames per lap for square and figure-eight; frame i >= period revisits
    /// frame i - period. 0 selects 90% of the keyframe count.
    std::size_t revisit_period = 0;
    /// Square side length, figure-eight lobe radius, or corridor length.
    double extent = 20.0;
    double frame_interval = 0.1;
    DriftParams drift;
    PlaceParams places;
    CorrespondenceParams correspondences;
    std::uint64_t seed = 0;

    std::size_t effective_period() const;
};

/// Throws InvalidConfig when the invariants on WorldConfig do not hold.
void validate(const WorldConfig& cfg);

struct SyntheticDataset {
    WorldConfig config;
    std::vector<double> timestamps;
    std::vector<Sim3> ground_truth;
    /// odometry[i] is the measured relative pose from frame i to frame i + 1.
    std::vector<Sim3> odometry;
    std::vector<LocalDescriptorSet> locals;
    std::vector<std::size_t> place_of;
    /// (later frame, earlier frame) pairs observing the same place.
    std::vector<std::pair<FrameId, FrameId>> revisits;

    std::size_t size() const { return ground_truth.size(); }
    bool same_place(FrameId a, FrameId b) const;
};

SyntheticDataset generate(const WorldConfig& cfg);

/// Chain relative poses from `start`: out[0] = start, out[i+1] = out[i] * rel[i].
std::vector<Sim3> integrate(const Sim3& start, std::span<const Sim3> relatives);

struct CorrespondenceSet {
    std::vector<Correspondence> pairs;
    /// Maps frame_a points into frame_b: T_b^-1 * T_a on ground truth.
    Sim3 ground_truth;
    std::vector<bool> is_inlier;
    std::size_t inlier_count = 0;
};

/// round(n * (1 - outlier_ratio)) pairs consistent with the ground-truth relative
/// pose plus Gaussian noise; the rest uniform in the sampling box. Outlier ratio
/// 1.0 yields pure clutter (used for frames that share no view).
CorrespondenceSet make_correspondences(const SyntheticDataset& dataset, FrameId frame_a,
                                       FrameId frame_b, std::size_t n, double outlier_ratio,
                                       double noise_sigma, std::uint64_t seed);

enum class Alignment { None, SE3, Sim3 };

std::string to_string(Alignment alignment);
Alignment parse_alignment(const std::string& name);

/// RMS position error after optionally aligning est onto gt.
double ate_rmse(std::span<const Vec3> gt, std::span<const Vec3> est, Alignment alignment);

/// Pairs poses by position in the sequence; frame ids must agree.
double ate_rmse(const Trajectory& gt, const Trajectory& est, Alignment alignment);

std::vector<Vec3> positions(const Trajectory& trajectory);
std::vector<Vec3> positions(std::span<const Sim3> poses);

Trajectory make_trajectory(std::span<const Sim3> poses, std::span<const double> timestamps);

}  // namespace loopforge::harness
