#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "loopforge/descriptor_db.hpp"
#include "loopforge/geometry.hpp"

namespace loopforge {

enum class EdgeKind { Odometry, Loop };

/// Relative constraint: measurement ~= poses[from]^-1 * poses[to].
struct PoseEdge {
    FrameId from = 0;
    FrameId to = 0;
    Sim3 measurement;
    double weight = 1.0;
    EdgeKind kind = EdgeKind::Odometry;
};

using PoseMap = std::map<FrameId, Sim3>;

/// Sim(3) pose graph. Poses are camera-to-world; the first node added is the
/// gauge and stays fixed during optimization.
class PoseGraph {
public:
    void add_node(FrameId id, const Sim3& pose);
    /// Throws MissingNode for unknown endpoints, InvalidConfig for self-loops or
    /// non-positive weights.
    void add_edge(const PoseEdge& edge);

    void set_pose(FrameId id, const Sim3& pose);
    void set_poses(const PoseMap& poses);
    void set_gauge(FrameId id);

    const PoseMap& nodes() const { return nodes_; }
    const std::vector<PoseEdge>& edges() const { return edges_; }
    std::optional<FrameId> gauge_id() const { return gauge_; }
    bool contains(FrameId id) const { return nodes_.count(id) != 0; }
    std::size_t loop_edge_count() const;

    /// True when every node is reachable from the gauge through edges.
    bool connected() const;

private:
    PoseMap nodes_;
    std::vector<PoseEdge> edges_;
    std::optional<FrameId> gauge_;
};

/// log( Z^-1 * (T_from^-1 * T_to) ) for measurement Z.
Tangent7 edge_residual(const PoseEdge& edge, const PoseMap& poses);

/// Residual plus its derivatives with respect to right perturbations
/// T <- T * exp(d) of each endpoint.
struct EdgeLinearization {
    Tangent7 residual;
    Mat7 d_from;
    Mat7 d_to;
};

EdgeLinearization linearize_edge(const PoseEdge& edge, const PoseMap& poses);
EdgeLinearization linearize_edge_numeric(const PoseEdge& edge, const PoseMap& poses,
                                         double step = 1e-6);

/// Scalar information weight of a verified loop: 10 * inliers / min_inliers, capped at 50.
double loop_edge_weight(std::size_t inliers, std::size_t min_inliers);

enum class JacobianMode { Analytic, Numeric };

struct OptimizerConfig {
    int max_iterations = 50;
    double initial_damping = 1e-4;
    double cost_tolerance = 1e-9;
    bool huber_loop_edges = false;
    double huber_delta = 1.0;
    JacobianMode jacobians = JacobianMode::Analytic;
};

struct OptimizationReport {
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Cost after the initial evaluation and after every accepted step.
    std::vector<double> accepted_costs;
};

struct OptimizationResult {
    PoseMap poses;
    OptimizationReport report;
};

/// Total cost sum_e w_e * rho(|r_e|^2) of the graph at `poses`.
double graph_cost(const PoseGraph& graph, const PoseMap& poses, const OptimizerConfig& cfg);

/// Levenberg-Marquardt over all non-gauge poses with block-sparse (7x7)
/// normal equations. Throws DisconnectedGraph or SingularNormalEquations.
OptimizationResult optimize(const PoseGraph& graph, const OptimizerConfig& cfg = {});

struct TrajectoryEntry {
    FrameId frame_id = 0;
    double timestamp = 0.0;
    Sim3 pose;
    /// Entries with a reference that are not covered by an optimization follow
    /// their reference rigidly; entries without one must be optimized.
    std::optional<FrameId> reference;
};

using Trajectory = std::vector<TrajectoryEntry>;

/// Replace optimized poses and carry every other entry along with its
/// reference: T_new = T_ref_new * T_ref_old^-1 * T_old. Entries are processed
/// in order, so references must precede their dependents. Throws
/// MissingKeyframe when an entry has neither an optimized pose nor a usable reference.
Trajectory apply_correction(const Trajectory& trajectory, const PoseMap& optimized);

/// Trajectory shared between ingestion and readers. Corrections replace the
/// whole trajectory under an exclusive lock, so readers see either the state
/// before or after a correction, never a mix.
class TrajectoryStore {
public:
    void append(const TrajectoryEntry& entry);
    void apply_correction(const PoseMap& optimized);

    Trajectory snapshot() const;
    std::optional<Sim3> pose(FrameId id) const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    Trajectory entries_;
    std::map<FrameId, std::size_t> index_;
};

}  // namespace loopforge
