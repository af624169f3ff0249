#include "loopforge/pose_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <queue>
#include <set>
#include <string>

#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "loopforge/error.hpp"

namespace loopforge {

namespace {

constexpr double kMaxDamping = 1e12;
constexpr double kNegligibleCost = 1e-24;

const Sim3& pose_of(const PoseMap& poses, FrameId id) {
    auto it = poses.find(id);
    if (it == poses.end()) {
        throw Error(ErrorCode::MissingNode, "pose graph has no node " + std::to_string(id));
    }
    return it->second;
}

// Robust weight and cost contribution of one edge.
struct EdgeWeighting {
    double irls_weight;
    double cost;
};

EdgeWeighting weigh(const PoseEdge& edge, const Tangent7& r, const OptimizerConfig& cfg) {
    const double sq = r.squaredNorm();
    if (cfg.huber_loop_edges && edge.kind == EdgeKind::Loop) {
        const double norm = std::sqrt(sq);
        const double delta = cfg.huber_delta;
        if (norm > delta) {
            return {edge.weight * delta / norm, edge.weight * (2.0 * delta * norm - delta * delta)};
        }
    }
    return {edge.weight, edge.weight * sq};
}

}  // namespace

void PoseGraph::add_node(FrameId id, const Sim3& pose) {
    nodes_[id] = pose;
    if (!gauge_) {
        gauge_ = id;
    }
}

void PoseGraph::add_edge(const PoseEdge& edge) {
    if (edge.from == edge.to) {
        throw Error(ErrorCode::InvalidConfig, "pose edge endpoints must differ");
    }
    if (!(edge.weight > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "pose edge weight must be positive");
    }
    pose_of(nodes_, edge.from);
    pose_of(nodes_, edge.to);
    edges_.push_back(edge);
}

void PoseGraph::set_pose(FrameId id, const Sim3& pose) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
        throw Error(ErrorCode::MissingNode, "pose graph has no node " + std::to_string(id));
    }
    it->second = pose;
}

void PoseGraph::set_poses(const PoseMap& poses) {
    for (const auto& [id, pose] : poses) {
        if (auto it = nodes_.find(id); it != nodes_.end()) {
            it->second = pose;
        }
    }
}

void PoseGraph::set_gauge(FrameId id) {
    pose_of(nodes_, id);
    gauge_ = id;
}

std::size_t PoseGraph::loop_edge_count() const {
    return static_cast<std::size_t>(std::count_if(
        edges_.begin(), edges_.end(), [](const PoseEdge& e) { return e.kind == EdgeKind::Loop; }));
}

bool PoseGraph::connected() const {
    if (!gauge_) {
        return nodes_.empty();
    }
    std::map<FrameId, std::vector<FrameId>> adjacency;
    for (const auto& e : edges_) {
        adjacency[e.from].push_back(e.to);
        adjacency[e.to].push_back(e.from);
    }
    std::set<FrameId> seen{*gauge_};
    std::queue<FrameId> frontier;
    frontier.push(*gauge_);
    while (!frontier.empty()) {
        const FrameId id = frontier.front();
        frontier.pop();
        for (FrameId next : adjacency[id]) {
            if (seen.insert(next).second) {
                frontier.push(next);
            }
        }
    }
    return seen.size() == nodes_.size();
}

Tangent7 edge_residual(const PoseEdge& edge, const PoseMap& poses) {
    const Sim3& a = pose_of(poses, edge.from);
    const Sim3& b = pose_of(poses, edge.to);
    return sim3_log(sim3_inverse(edge.measurement) * (sim3_inverse(a) * b));
}

EdgeLinearization linearize_edge(const PoseEdge& edge, const PoseMap& poses) {
    const Sim3& a = pose_of(poses, edge.from);
    const Sim3& b = pose_of(poses, edge.to);
    EdgeLinearization lin;
    lin.residual = sim3_log(sim3_inverse(edge.measurement) * (sim3_inverse(a) * b));
    // r(b * exp(d)) ~= r + J_r^-1(r) d
    // r(a * exp(d)) ~= r - J_r^-1(r) Ad(b^-1 a) d
    const Mat7 jr_inv = sim3_right_jacobian(lin.residual).partialPivLu().inverse();
    lin.d_to = jr_inv;
    lin.d_from = -jr_inv * sim3_adjoint(sim3_inverse(b) * a);
    return lin;
}

EdgeLinearization linearize_edge_numeric(const PoseEdge& edge, const PoseMap& poses,
                                         double step) {
    EdgeLinearization lin;
    lin.residual = edge_residual(edge, poses);
    PoseMap local{{edge.from, pose_of(poses, edge.from)}, {edge.to, pose_of(poses, edge.to)}};
    for (int which = 0; which < 2; ++which) {
        const FrameId id = which == 0 ? edge.from : edge.to;
        const Sim3 base = local[id];
        Mat7& jac = which == 0 ? lin.d_from : lin.d_to;
        for (int k = 0; k < 7; ++k) {
            Tangent7 d = Tangent7::Zero();
            d(k) = step;
            local[id] = base * sim3_exp(d);
            const Tangent7 plus = edge_residual(edge, local);
            local[id] = base * sim3_exp(-d);
            const Tangent7 minus = edge_residual(edge, local);
            jac.col(k) = (plus - minus) / (2.0 * step);
        }
        local[id] = base;
    }
    return lin;
}

double loop_edge_weight(std::size_t inliers, std::size_t min_inliers) {
    const double ratio = static_cast<double>(inliers) / static_cast<double>(std::max<std::size_t>(min_inliers, 1));
    return std::min(50.0, 10.0 * ratio);
}

double graph_cost(const PoseGraph& graph, const PoseMap& poses, const OptimizerConfig& cfg) {
    double cost = 0.0;
    for (const auto& e : graph.edges()) {
        cost += weigh(e, edge_residual(e, poses), cfg).cost;
    }
    return cost;
}

OptimizationResult optimize(const PoseGraph& graph, const OptimizerConfig& cfg) {
    if (!graph.gauge_id()) {
        throw Error(ErrorCode::DisconnectedGraph, "pose graph is empty");
    }
    if (!graph.connected()) {
        throw Error(ErrorCode::DisconnectedGraph, "some nodes are not reachable from the gauge node");
    }
    const FrameId gauge = *graph.gauge_id();

    std::map<FrameId, Eigen::Index> column;
    Eigen::Index n_vars = 0;
    for (const auto& [id, pose] : graph.nodes()) {
        if (id != gauge) {
            column[id] = n_vars;
            n_vars += 7;
        }
    }

    OptimizationResult result;
    result.poses = graph.nodes();
    OptimizationReport& report = result.report;
    double cost = graph_cost(graph, result.poses, cfg);
    report.initial_cost = cost;
    report.final_cost = cost;
    report.accepted_costs.push_back(cost);
    if (n_vars == 0 || cost <= kNegligibleCost) {
        report.converged = true;
        return result;
    }

    double damping = cfg.initial_damping;
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    bool pattern_analyzed = false;

    while (report.iterations < cfg.max_iterations) {
        // Linearize at the current estimate.
        triplets.clear();
        Eigen::VectorXd gradient = Eigen::VectorXd::Zero(n_vars);
        Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(n_vars);
        auto add_block = [&](Eigen::Index row, Eigen::Index col, const Mat7& block) {
            for (int i = 0; i < 7; ++i) {
                for (int j = 0; j < 7; ++j) {
                    triplets.emplace_back(row + i, col + j, block(i, j));
                }
            }
        };
        for (const auto& e : graph.edges()) {
            const EdgeLinearization lin = cfg.jacobians == JacobianMode::Analytic
                                              ? linearize_edge(e, result.poses)
                                              : linearize_edge_numeric(e, result.poses);
            const double w = weigh(e, lin.residual, cfg).irls_weight;
            const bool from_free = e.from != gauge;
            const bool to_free = e.to != gauge;
            const Eigen::Index cf = from_free ? column.at(e.from) : -1;
            const Eigen::Index ct = to_free ? column.at(e.to) : -1;
            if (from_free) {
                const Mat7 h = w * lin.d_from.transpose() * lin.d_from;
                add_block(cf, cf, h);
                diagonal.segment<7>(cf) += h.diagonal();
                gradient.segment<7>(cf) += w * lin.d_from.transpose() * lin.residual;
            }
            if (to_free) {
                const Mat7 h = w * lin.d_to.transpose() * lin.d_to;
                add_block(ct, ct, h);
                diagonal.segment<7>(ct) += h.diagonal();
                gradient.segment<7>(ct) += w * lin.d_to.transpose() * lin.residual;
            }
            if (from_free && to_free) {
                const Mat7 h = w * lin.d_from.transpose() * lin.d_to;
                add_block(cf, ct, h);
                add_block(ct, cf, h.transpose());
            }
        }
        const std::size_t base_triplets = triplets.size();

        bool accepted = false;
        bool stalled = false;
        while (!accepted && report.iterations < cfg.max_iterations) {
            ++report.iterations;
            triplets.resize(base_triplets);
            for (Eigen::Index i = 0; i < n_vars; ++i) {
                triplets.emplace_back(i, i, damping * std::max(diagonal(i), 1e-9));
            }
            Eigen::SparseMatrix<double> hessian(n_vars, n_vars);
            hessian.setFromTriplets(triplets.begin(), triplets.end());
            if (!pattern_analyzed) {
                solver.analyzePattern(hessian);
                pattern_analyzed = true;
            }
            solver.factorize(hessian);
            Eigen::VectorXd step;
            if (solver.info() == Eigen::Success) {
                step = solver.solve(-gradient);
            }
            if (solver.info() != Eigen::Success || !step.allFinite()) {
                damping *= 10.0;
                if (damping > kMaxDamping) {
                    throw Error(ErrorCode::SingularNormalEquations,
                                "normal equations stayed singular after damping escalation");
                }
                continue;
            }

            PoseMap candidate = result.poses;
            for (const auto& [id, col] : column) {
                candidate[id] = candidate[id] * sim3_exp(step.segment<7>(col));
            }
            double new_cost;
            try {
                new_cost = graph_cost(graph, candidate, cfg);
            } catch (const Error&) {
                new_cost = std::numeric_limits<double>::infinity();
            }
            if (new_cost < cost) {
                const double relative = (cost - new_cost) / cost;
                result.poses = std::move(candidate);
                cost = new_cost;
                report.accepted_costs.push_back(cost);
                damping = std::max(damping / 10.0, 1e-15);
                accepted = true;
                if (relative < cfg.cost_tolerance || cost <= kNegligibleCost) {
                    report.converged = true;
                }
            } else {
                damping *= 10.0;
                if (damping > kMaxDamping) {
                    // No descent direction left at double precision.
                    stalled = true;
                    break;
                }
            }
        }
        if (report.converged || stalled) {
            report.converged = true;
            break;
        }
    }
    report.final_cost = cost;
    return result;
}

Trajectory apply_correction(const Trajectory& trajectory, const PoseMap& optimized) {
    Trajectory out = trajectory;
    std::map<FrameId, Sim3> before;
    std::map<FrameId, Sim3> after;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const TrajectoryEntry& old = trajectory[i];
        TrajectoryEntry& entry = out[i];
        if (auto it = optimized.find(old.frame_id); it != optimized.end()) {
            entry.pose = it->second;
        } else {
            if (!old.reference) {
                throw Error(ErrorCode::MissingKeyframe,
                            "no optimized pose for keyframe " + std::to_string(old.frame_id));
            }
            const FrameId ref = *old.reference;
            Sim3 ref_before;
            Sim3 ref_after;
            if (auto b = before.find(ref); b != before.end()) {
                ref_before = b->second;
                ref_after = after.at(ref);
            } else {
                throw Error(ErrorCode::MissingKeyframe,
                            "reference " + std::to_string(ref) + " of frame " +
                                std::to_string(old.frame_id) + " is not available");
            }
            entry.pose = ref_after * (sim3_inverse(ref_before) * old.pose);
        }
        before[old.frame_id] = old.pose;
        after[old.frame_id] = entry.pose;
    }
    return out;
}

void TrajectoryStore::append(const TrajectoryEntry& entry) {
    std::unique_lock lock(mutex_);
    index_[entry.frame_id] = entries_.size();
    entries_.push_back(entry);
}

void TrajectoryStore::apply_correction(const PoseMap& optimized) {
    // Compute outside the lock from a snapshot; the single writer guarantees
    // no append happens in between.
    Trajectory corrected = loopforge::apply_correction(snapshot(), optimized);
    std::unique_lock lock(mutex_);
    entries_ = std::move(corrected);
}

Trajectory TrajectoryStore::snapshot() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

std::optional<Sim3> TrajectoryStore::pose(FrameId id) const {
    std::shared_lock lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return entries_[it->second].pose;
}

std::size_t TrajectoryStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

}  // namespace loopforge
