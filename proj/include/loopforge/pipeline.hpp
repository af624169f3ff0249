#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "loopforge/descriptor_db.hpp"
#include "loopforge/descriptors.hpp"
#include "loopforge/error.hpp"
#include "loopforge/pose_graph.hpp"
#include "loopforge/threshold.hpp"
#include "loopforge/verification.hpp"

namespace loopforge {

struct PipelineConfig {
    std::uint64_t exclusion_window = 50;
    ThresholdConfig threshold;
    std::size_t retrieval_k = 5;
    std::size_t vocabulary_k = 32;
    /// Empty: the vocabulary is trained on the run's own local descriptors.
    std::string vocabulary_path;
    RansacConfig ransac;
    OptimizerConfig pgo;
    /// Keyframes ingested between launching an optimization and applying its
    /// correction.
    std::size_t optimization_lag = 10;
    std::uint64_t seed = 0;
};

/// Throws InvalidConfig when a sub-config invariant is violated.
void validate(const PipelineConfig& cfg);

struct KeyframeInfo {
    FrameId frame_id = 0;
    double timestamp = 0.0;
};

class DescriptorProvider {
public:
    virtual ~DescriptorProvider() = default;
    virtual LocalDescriptorSet local_descriptors(FrameId id) const = 0;
};

class CorrespondenceProvider {
public:
    virtual ~CorrespondenceProvider() = default;
    /// Lifted 3D pairs: p in the query frame, q in the match frame.
    virtual std::vector<Correspondence> correspondences(FrameId query, FrameId match) const = 0;
};

class OdometryProvider {
public:
    virtual ~OdometryProvider() = default;
    virtual Sim3 initial_pose() const { return Sim3::identity(); }
    /// Measured relative pose from `from` to `to` (consecutive keyframes).
    virtual Sim3 relative(FrameId from, FrameId to) const = 0;
};

struct Providers {
    const DescriptorProvider& descriptors;
    const CorrespondenceProvider& correspondences;
    const OdometryProvider& odometry;
};

namespace event {

struct KeyframeIngested {
    FrameId frame_id = 0;
    double timestamp = 0.0;
    bool degenerate = false;
};

struct CandidateScored {
    FrameId frame_id = 0;
    FrameId match_id = 0;
    double similarity = 0.0;
    std::optional<double> loop_thresh;
    bool is_loop = false;
};

struct LoopAccepted {
    FrameId frame_id = 0;
    FrameId match_id = 0;
    double similarity = 0.0;
    double loop_thresh = 0.0;
    std::size_t inliers = 0;
    double weight = 0.0;
    Sim3 relative;
};

struct LoopRejected {
    FrameId frame_id = 0;
    FrameId match_id = 0;
    ErrorCode reason = ErrorCode::InsufficientInliers;
};

struct OptimizationStarted {
    FrameId frame_id = 0;
    std::size_t run = 0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t loop_edges = 0;
};

struct OptimizationFinished {
    FrameId frame_id = 0;
    std::size_t run = 0;
    OptimizationReport report;
    /// Set when the optimizer threw; no correction was applied.
    std::optional<ErrorCode> error;
};

}  // namespace event

using PipelineEvent = std::variant<event::KeyframeIngested, event::CandidateScored,
                                   event::LoopAccepted, event::LoopRejected,
                                   event::OptimizationStarted, event::OptimizationFinished>;

FrameId event_frame(const PipelineEvent& e);
std::string event_name(const PipelineEvent& e);

struct EventLog {
    std::string config_hash;
    std::vector<PipelineEvent> events;
};

struct RunResult {
    Trajectory trajectory;
    /// The same keyframes chained from odometry alone, before any correction.
    Trajectory odometry_trajectory;
    EventLog log;
    std::vector<LoopConstraint> loops;
};

/// Loop registration over a keyframe stream: aggregate, retrieve, threshold,
/// verify, add loop edges, optimize asynchronously, apply corrections.
///
/// Errors inside loop handling become LoopRejected events; only broken inputs
/// (ProviderDesync, descriptor dimension errors) abort the run.
RunResult run(std::span<const KeyframeInfo> stream, const Providers& providers,
              const Vocabulary& vocabulary, const PipelineConfig& cfg);

/// Retrieval and thresholding only: the loop candidates (top-1 matches that
/// cleared loop_thresh) in stream order, before geometric verification.
std::vector<event::CandidateScored> detect(std::span<const KeyframeInfo> stream,
                                           const DescriptorProvider& descriptors,
                                           const Vocabulary& vocabulary, const PipelineConfig& cfg);

/// Rebuild the final trajectory of a previous run from its event log and the
/// odometry alone. Throws ConfigMismatch, MissingEvent or ReplayDivergence.
Trajectory replay(const EventLog& log, std::span<const KeyframeInfo> stream,
                  const OdometryProvider& odometry, const PipelineConfig& cfg);

/// FNV-1a over the canonical JSON form of the configuration, as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace loopforge
