#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace loopforge {

/// n local descriptors of dimension d, one per row.
using LocalDescriptorSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Visual vocabulary (k cluster centers of dimension d) used as the VLAD codebook.
/// Immutable after construction.
class Vocabulary {
public:
    Vocabulary(LocalDescriptorSet centers, std::uint64_t seed,
               std::vector<double> objective_history = {});

    std::size_t k() const { return static_cast<std::size_t>(centers_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(centers_.cols()); }
    std::uint64_t seed() const { return seed_; }
    const LocalDescriptorSet& centers() const { return centers_; }

    /// k-means objective after each assignment step of training (empty if the
    /// vocabulary was loaded rather than trained).
    const std::vector<double>& objective_history() const { return objective_history_; }

    /// Index of the nearest center in L2; ties go to the lowest index.
    std::size_t nearest(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

private:
    LocalDescriptorSet centers_;
    std::uint64_t seed_;
    std::vector<double> objective_history_;
};

/// k-means++ seeding followed by Lloyd iterations (at most 25, or until no
/// center moves by more than 1e-6). Deterministic for a given seed.
Vocabulary build_vocabulary(std::span<const LocalDescriptorSet> training, std::size_t k,
                            std::uint64_t seed);

struct GlobalDescriptor {
    Eigen::VectorXd values;
    /// Set when every VLAD block was zero (empty input or all residuals zero).
    bool degenerate = true;

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

/// Hard-assignment VLAD with intra-normalization and a final L2 normalization.
GlobalDescriptor aggregate_vlad(const LocalDescriptorSet& locals, const Vocabulary& vocab);

/// Cosine of the angle between a and b; 0.0 when either is the zero vector.
double cosine_similarity(const GlobalDescriptor& a, const GlobalDescriptor& b);

}  // namespace loopforge
