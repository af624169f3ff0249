#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "loopforge/descriptor_db.hpp"
#include "loopforge/error.hpp"
#include "loopforge/geometry.hpp"

namespace loopforge {

/// The same landmark seen from two keyframes: p in the query frame, q in the
/// match frame. Verification looks for T with q ~= T * p.
struct Correspondence {
    Vec3 p = Vec3::Zero();
    Vec3 q = Vec3::Zero();
};

struct RansacConfig {
    int max_iters = 1000;
    double inlier_dist = 0.05;
    std::size_t min_inliers = 30;
    std::uint64_t seed = 0;
    /// Stop once the sampled-all-inliers probability reaches `confidence`.
    bool adaptive_stop = false;
    double confidence = 0.99;
};

struct VerificationResult {
    Sim3 transform;
    std::vector<std::size_t> inlier_indices;
    bool accepted = false;
};

/// Verified loop edge: `relative` maps query-frame points into the match frame.
struct LoopConstraint {
    FrameId query_id = 0;
    FrameId match_id = 0;
    Sim3 relative;
    std::size_t inliers = 0;
    double similarity = 0.0;
};

struct VerifyOutcome {
    std::optional<LoopConstraint> constraint;
    std::optional<ErrorCode> reason;  // set iff constraint is empty
};

struct UmeyamaOptions {
    /// false pins the scale to 1 (rigid alignment).
    bool with_scale = true;
    /// Rank-1 cross-covariances (collinear points) still have an optimal, if
    /// non-unique, rotation; trajectory alignment accepts it, registration does not.
    bool require_rank_two = true;
};

/// Closed-form least-squares similarity dst ~= c * R * src + t (Umeyama 1991).
///
/// Throws TooFewPoints for fewer than 3 pairs, DimensionMismatch for unequal
/// lengths, DegenerateConfiguration when the source spread vanishes or the
/// cross-covariance has rank below 2.
Sim3 umeyama(std::span<const Vec3> src, std::span<const Vec3> dst, UmeyamaOptions opts = {});

/// Non-throwing variant for hot loops; nullopt where umeyama() would throw
/// DegenerateConfiguration.
std::optional<Sim3> try_umeyama(std::span<const Vec3> src, std::span<const Vec3> dst,
                                UmeyamaOptions opts = {});

VerificationResult ransac_sim3(std::span<const Correspondence> corr, const RansacConfig& cfg);

VerifyOutcome verify_loop(const LoopCandidate& candidate, std::span<const Correspondence> corr,
                          const RansacConfig& cfg);

}  // namespace loopforge
