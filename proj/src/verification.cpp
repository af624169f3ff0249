#include "loopforge/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SVD>

namespace loopforge {

namespace {

constexpr double kMinSourceVariance = 1e-12;
constexpr double kRankTolerance = 1e-10;

void check_inputs(std::span<const Vec3> src, std::span<const Vec3> dst) {
    if (src.size() != dst.size()) {
        throw Error(ErrorCode::DimensionMismatch, "umeyama needs equally many source and target points");
    }
    if (src.size() < 3) {
        throw Error(ErrorCode::TooFewPoints,
                    "umeyama needs at least 3 point pairs, got " + std::to_string(src.size()));
    }
}

std::size_t count_inliers(std::span<const Correspondence> corr, const Sim3& model,
                          double inlier_dist, std::vector<std::size_t>* indices) {
    const double limit = inlier_dist * inlier_dist;
    const Mat3 sr = model.s * model.rotation_matrix();
    std::size_t count = 0;
    if (indices) {
        indices->clear();
    }
    for (std::size_t i = 0; i < corr.size(); ++i) {
        if ((corr[i].q - (sr * corr[i].p + model.t)).squaredNorm() <= limit) {
            ++count;
            if (indices) {
                indices->push_back(i);
            }
        }
    }
    return count;
}

}  // namespace

std::optional<Sim3> try_umeyama(std::span<const Vec3> src, std::span<const Vec3> dst,
                                UmeyamaOptions opts) {
    check_inputs(src, dst);
    const double n = static_cast<double>(src.size());

    Vec3 mu_src = Vec3::Zero();
    Vec3 mu_dst = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        mu_src += src[i];
        mu_dst += dst[i];
    }
    mu_src /= n;
    mu_dst /= n;

    double var_src = 0.0;
    Mat3 sigma = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec3 ds = src[i] - mu_src;
        const Vec3 dd = dst[i] - mu_dst;
        var_src += ds.squaredNorm();
        sigma += dd * ds.transpose();
    }
    var_src /= n;
    sigma /= n;
    if (!(var_src >= kMinSourceVariance)) {
        return std::nullopt;
    }

    Eigen::JacobiSVD<Mat3> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 d = svd.singularValues();
    const std::size_t needed_rank = opts.require_rank_two ? 1 : 0;
    if (!(d(needed_rank) > kRankTolerance * std::max(d(0), kMinSourceVariance))) {
        return std::nullopt;
    }
    const Mat3& u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    Vec3 s_diag(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);

    const Mat3 rot = u * s_diag.asDiagonal() * v.transpose();
    const double scale = opts.with_scale ? d.dot(s_diag) / var_src : 1.0;
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        return std::nullopt;
    }
    Sim3 out(scale, rot, Vec3::Zero());
    out.t = mu_dst - scale * (out.r * mu_src);
    return out;
}

Sim3 umeyama(std::span<const Vec3> src, std::span<const Vec3> dst, UmeyamaOptions opts) {
    auto result = try_umeyama(src, dst, opts);
    if (!result) {
        throw Error(ErrorCode::DegenerateConfiguration,
                    "point configuration does not determine a similarity transform");
    }
    return *result;
}

VerificationResult ransac_sim3(std::span<const Correspondence> corr, const RansacConfig& cfg) {
    if (corr.size() < 3) {
        throw Error(ErrorCode::TooFewPoints,
                    "RANSAC needs at least 3 correspondences, got " + std::to_string(corr.size()));
    }
    if (cfg.max_iters < 1 || !(cfg.inlier_dist > 0.0) || cfg.min_inliers < 3) {
        throw Error(ErrorCode::InvalidConfig, "invalid RANSAC configuration");
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, corr.size() - 1);

    std::optional<Sim3> best_model;
    std::size_t best_count = 0;
    std::array<std::size_t, 3> best_sample{};
    std::array<Vec3, 3> src;
    std::array<Vec3, 3> dst;
    long required_iters = cfg.max_iters;

    for (long iter = 0; iter < cfg.max_iters && iter < required_iters; ++iter) {
        std::array<std::size_t, 3> sample{};
        sample[0] = pick(rng);
        do {
            sample[1] = pick(rng);
        } while (sample[1] == sample[0]);
        do {
            sample[2] = pick(rng);
        } while (sample[2] == sample[0] || sample[2] == sample[1]);

        for (std::size_t j = 0; j < 3; ++j) {
            src[j] = corr[sample[j]].p;
            dst[j] = corr[sample[j]].q;
        }
        const auto model = try_umeyama(src, dst);
        if (!model) {
            continue;
        }
        const std::size_t count = count_inliers(corr, *model, cfg.inlier_dist, nullptr);
        std::sort(sample.begin(), sample.end());
        if (!best_model || count > best_count || (count == best_count && sample < best_sample)) {
            best_model = model;
            best_count = count;
            best_sample = sample;
            if (cfg.adaptive_stop && count > 0) {
                const double w = static_cast<double>(count) / static_cast<double>(corr.size());
                const double p_good = w * w * w;
                if (p_good >= 1.0) {
                    required_iters = iter + 1;
                } else {
                    const double needed = std::log(1.0 - cfg.confidence) / std::log(1.0 - p_good);
                    required_iters = std::min<long>(cfg.max_iters, static_cast<long>(std::ceil(needed)));
                }
            }
        }
    }

    if (!best_model) {
        throw Error(ErrorCode::AllSamplesDegenerate, "every RANSAC sample was degenerate");
    }

    VerificationResult result;
    result.transform = *best_model;
    count_inliers(corr, result.transform, cfg.inlier_dist, &result.inlier_indices);

    if (result.inlier_indices.size() >= 3) {
        std::vector<Vec3> in_src;
        std::vector<Vec3> in_dst;
        in_src.reserve(result.inlier_indices.size());
        in_dst.reserve(result.inlier_indices.size());
        for (auto i : result.inlier_indices) {
            in_src.push_back(corr[i].p);
            in_dst.push_back(corr[i].q);
        }
        if (auto refit = try_umeyama(in_src, in_dst)) {
            result.transform = *refit;
            count_inliers(corr, result.transform, cfg.inlier_dist, &result.inlier_indices);
        }
    }
    result.accepted = result.inlier_indices.size() >= cfg.min_inliers;
    return result;
}

VerifyOutcome verify_loop(const LoopCandidate& candidate, std::span<const Correspondence> corr,
                          const RansacConfig& cfg) {
    VerifyOutcome outcome;
    VerificationResult result;
    try {
        result = ransac_sim3(corr, cfg);
    } catch (const Error& e) {
        outcome.reason = e.code();
        return outcome;
    }
    if (!result.accepted) {
        outcome.reason = ErrorCode::InsufficientInliers;
        return outcome;
    }
    LoopConstraint c;
    c.query_id = candidate.query_id;
    c.match_id = candidate.match_id;
    c.relative = result.transform;
    c.inliers = result.inlier_indices.size();
    c.similarity = candidate.similarity;
    outcome.constraint = c;
    return outcome;
}

}  // namespace loopforge
