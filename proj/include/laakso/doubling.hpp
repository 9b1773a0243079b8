#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "laakso/instance.hpp"

namespace laakso {

struct ScaleRow {
    double radius = 0.0;
    PointId worst_center = 0;
    std::int64_t packing_size = 0;
};

/// Greedy-packing estimate of the doubling constant.
///
/// For a center x and radius r the probe scans B(x, 2r) in point-id order and
/// keeps every point farther than r from all points kept so far. The kept set
/// is r-separated and maximal, so its radius-r balls cover B(x, 2r): the
/// packing size upper-bounds the number of r-balls needed for that ball.
/// lambda_hat is the largest packing seen; lambda_hat^2 is the |S|^2-style
/// bound on the doubling constant.
struct DoublingEstimate {
    std::int64_t lambda_hat = 1;
    std::int64_t lambda_hat_squared = 1;
    std::vector<ScaleRow> per_scale;
    std::vector<double> radii;
};

/// Geometric grid from the smallest to the largest positive pairwise distance
/// with ratio 2. Empty when all points coincide.
std::vector<double> auto_radius_grid(std::span<const std::vector<double>> points, double p);
std::vector<double> auto_radius_grid(const Instance& inst);

/// Pass an empty `radii` for the automatic grid. Points are identified by
/// their index, which fixes the greedy scan order.
DoublingEstimate doubling_estimate(std::span<const std::vector<double>> points, double p,
                                   const std::vector<double>& radii = {});
DoublingEstimate doubling_estimate(const Instance& inst, const std::vector<double>& radii = {});

struct EnvelopeRow {
    EdgeId edge = 0;
    int level = 0;
    double length = 0.0;
    double max_distance = 0.0;  ///< farthest descendant from the segment [a, b]
    double bound = 0.0;         ///< 2 eps length
    bool pass = true;
};

struct EnvelopeReport {
    std::vector<EnvelopeRow> rows;
    bool all_pass() const;
};

/// Checks that every descendant of every internal edge stays strictly within
/// 2 eps r of the edge's segment.
EnvelopeReport envelope_check(const Instance& inst);

}  // namespace laakso
