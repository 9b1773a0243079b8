#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "laakso/instance.hpp"

namespace laakso {

/// |x|^p with exact multiplication chains for the small integer exponents
/// used throughout (2, 3, 4, 8) and std::pow otherwise.
inline double abs_pow(double x, double p) {
    const double a = std::fabs(x);
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    if (p == 4.0) {
        const double s = a * a;
        return s * s;
    }
    if (p == 8.0) {
        const double s = a * a;
        const double q = s * s;
        return q * q;
    }
    if (p == 1.0) return a;
    return std::pow(a, p);
}

/// sum_j |x_j - y_j|^p without the final root. No overflow guard; meant for
/// comparisons between well-scaled points.
double lp_dist_pow(std::span<const double> x, std::span<const double> y, double p);

/// (sum_j |x_j - y_j|^p)^(1/p), factoring out the largest component so that
/// large coordinates do not overflow. Requires equal lengths and p >= 1.
double lp_dist(std::span<const double> x, std::span<const double> y, double p);

/// l_p norm of a single vector.
double lp_norm(std::span<const double> x, double p);

struct EmbeddingMeta {
    std::string method;
    std::uint64_t seed = 0;
    std::string config_hash;

    bool operator==(const EmbeddingMeta&) const = default;
};

/// A finite map point id -> R^d, stored row-major.
struct Embedding {
    int d = 1;
    double q = 4.0;  ///< norm exponent of the target space
    std::vector<double> images;  ///< n * d values
    EmbeddingMeta meta;

    std::size_t size() const { return d > 0 ? images.size() / static_cast<std::size_t>(d) : 0; }
    std::span<const double> image(PointId id) const {
        return {images.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(d),
                static_cast<std::size_t>(d)};
    }
    std::span<double> image(PointId id) {
        return {images.data() + static_cast<std::size_t>(id) * static_cast<std::size_t>(d),
                static_cast<std::size_t>(d)};
    }

    bool operator==(const Embedding&) const = default;
};

/// The identity map of an instance into R^(k+1) (optionally zero padded to `d`).
Embedding identity_embedding(const Instance& inst, int d = -1);

/// Throws SchemaError unless the embedding has one length-d image per point.
void check_covers(const Instance& inst, const Embedding& emb);

struct DistortionReport {
    double max_expansion = 0.0;    ///< max over pairs of image / source distance
    double max_contraction = 0.0;  ///< max over pairs of source / image distance
    double distortion = 0.0;       ///< product of the two, +inf on collapsed pairs
    std::pair<PointId, PointId> argmax_expansion_pair{0, 0};
    std::pair<PointId, PointId> argmax_contraction_pair{0, 0};
    std::int64_t pairs = 0;  ///< pairs with positive source distance
};

/// Brute-force distortion over all unordered pairs, source distances under
/// `source_p`, image distances under `image_q`. Pairs at zero source
/// distance (eps = 0 duplicates) are skipped. Ties keep the first pair in
/// (i, j) lexicographic order.
DistortionReport distortion(const Instance& inst, const Embedding& emb, double source_p,
                            double image_q);

/// Distortion with the instance's own exponent and the embedding's q.
DistortionReport distortion(const Instance& inst, const Embedding& emb);

/// Scales every image by 1 / max_expansion. Throws PreconditionError when the
/// expansion is zero or not finite.
Embedding normalize_nonexpansive(const Instance& inst, const Embedding& emb);

/// Fixed iteration count of the ternary search in point_segment_distance.
inline constexpr int kTernaryIterations = 200;

/// min over theta in [0, 1] of |x - a - theta (b - a)|_p. Throws
/// PreconditionError when a == b.
double point_segment_distance(std::span<const double> x, std::span<const double> a,
                              std::span<const double> b, double p);

}  // namespace laakso
