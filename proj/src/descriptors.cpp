#include "loopforge/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "loopforge/error.hpp"

namespace loopforge {

namespace {

constexpr int kMaxKMeansIterations = 25;
constexpr double kCenterMovementTolerance = 1e-6;

LocalDescriptorSet pool(std::span<const LocalDescriptorSet> training) {
    Eigen::Index rows = 0;
    Eigen::Index dim = -1;
    for (const auto& set : training) {
        if (set.rows() == 0) {
            continue;
        }
        if (dim >= 0 && set.cols() != dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        "training descriptors have dimensions " + std::to_string(dim) +
                            " and " + std::to_string(set.cols()));
        }
        dim = set.cols();
        rows += set.rows();
    }
    LocalDescriptorSet pooled(rows, std::max<Eigen::Index>(dim, 0));
    Eigen::Index offset = 0;
    for (const auto& set : training) {
        if (set.rows() == 0) {
            continue;
        }
        pooled.middleRows(offset, set.rows()) = set;
        offset += set.rows();
    }
    return pooled;
}

}  // namespace

Vocabulary::Vocabulary(LocalDescriptorSet centers, std::uint64_t seed,
                       std::vector<double> objective_history)
    : centers_(std::move(centers)), seed_(seed), objective_history_(std::move(objective_history)) {
    if (centers_.rows() < 1 || centers_.cols() < 1) {
        throw Error(ErrorCode::InsufficientData, "vocabulary needs at least one center");
    }
    if (!centers_.allFinite()) {
        throw Error(ErrorCode::InsufficientData, "vocabulary centers must be finite");
    }
}

std::size_t Vocabulary::nearest(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < centers_.rows(); ++j) {
        const double dist = (centers_.row(j) - x).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = static_cast<std::size_t>(j);
        }
    }
    return best;
}

Vocabulary build_vocabulary(std::span<const LocalDescriptorSet> training, std::size_t k,
                            std::uint64_t seed) {
    if (k == 0) {
        throw Error(ErrorCode::InsufficientData, "k must be positive");
    }
    const LocalDescriptorSet data = pool(training);
    const auto n = static_cast<std::size_t>(data.rows());
    if (n < k) {
        throw Error(ErrorCode::InsufficientData, "pooled descriptor count " + std::to_string(n) +
                                                     " is below k=" + std::to_string(k));
    }
    if (!data.allFinite()) {
        throw Error(ErrorCode::InsufficientData, "training descriptors must be finite");
    }

    std::mt19937_64 rng(seed);
    LocalDescriptorSet centers(static_cast<Eigen::Index>(k), data.cols());

    // k-means++ seeding.
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    centers.row(0) = data.row(static_cast<Eigen::Index>(first(rng)));
    Eigen::VectorXd d2(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        d2(static_cast<Eigen::Index>(i)) = (data.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
        const double total = d2.sum();
        if (!(total > 0.0)) {
            throw Error(ErrorCode::InsufficientData,
                        "fewer than k=" + std::to_string(k) + " distinct training descriptors");
        }
        const double target = unit(rng) * total;
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = d2(static_cast<Eigen::Index>(i));
            if (w <= 0.0) {
                continue;
            }
            acc += w;
            pick = i;
            if (acc >= target) {
                break;
            }
        }
        centers.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(pick));
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            d2(ii) = std::min(d2(ii), (data.row(ii) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm());
        }
    }

    // Lloyd iterations. Empty clusters keep their previous center.
    std::vector<double> history;
    std::vector<std::size_t> assignment(n);
    for (int iter = 0; iter < kMaxKMeansIterations; ++iter) {
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = data.row(static_cast<Eigen::Index>(i));
            std::size_t best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                const double dist = (centers.row(static_cast<Eigen::Index>(j)) - row).squaredNorm();
                if (dist < best_dist) {
                    best_dist = dist;
                    best = j;
                }
            }
            assignment[i] = best;
            objective += best_dist;
        }
        history.push_back(objective);

        LocalDescriptorSet sums = LocalDescriptorSet::Zero(centers.rows(), centers.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(static_cast<Eigen::Index>(assignment[i])) += data.row(static_cast<Eigen::Index>(i));
            ++counts[assignment[i]];
        }
        double movement = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) {
                continue;
            }
            const auto jj = static_cast<Eigen::Index>(j);
            const Eigen::RowVectorXd updated = sums.row(jj) / static_cast<double>(counts[j]);
            movement = std::max(movement, (updated - centers.row(jj)).norm());
            centers.row(jj) = updated;
        }
        if (movement < kCenterMovementTolerance) {
            break;
        }
    }

    return Vocabulary(std::move(centers), seed, std::move(history));
}

GlobalDescriptor aggregate_vlad(const LocalDescriptorSet& locals, const Vocabulary& vocab) {
    const auto k = static_cast<Eigen::Index>(vocab.k());
    const auto d = static_cast<Eigen::Index>(vocab.dim());
    GlobalDescriptor out;
    out.values = Eigen::VectorXd::Zero(k * d);
    out.degenerate = true;
    if (locals.rows() == 0) {
        return out;
    }
    if (locals.cols() != d) {
        throw Error(ErrorCode::DimensionMismatch, "local descriptor dimension " +
                                                      std::to_string(locals.cols()) +
                                                      " does not match vocabulary dimension " +
                                                      std::to_string(d));
    }

    for (Eigen::Index i = 0; i < locals.rows(); ++i) {
        const auto j = static_cast<Eigen::Index>(vocab.nearest(locals.row(i)));
        out.values.segment(j * d, d) += (locals.row(i) - vocab.centers().row(j)).transpose();
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        auto block = out.values.segment(j * d, d);
        const double norm = block.norm();
        if (norm > 0.0) {
            block /= norm;
        }
    }
    const double total = out.values.norm();
    if (total > 0.0) {
        out.values /= total;
        out.degenerate = false;
    }
    return out;
}

double cosine_similarity(const GlobalDescriptor& a, const GlobalDescriptor& b) {
    if (a.values.size() != b.values.size()) {
        throw Error(ErrorCode::DimensionMismatch, "global descriptors have lengths " +
                                                      std::to_string(a.values.size()) + " and " +
                                                      std::to_string(b.values.size()));
    }
    const double na = a.values.norm();
    const double nb = b.values.norm();
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(a.values.dot(b.values) / (na * nb), -1.0, 1.0);
}

}  // namespace loopforge
