#include "laakso/doubling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "laakso/errors.hpp"
#include "laakso/metric.hpp"

namespace laakso {

namespace {

// Relative slack on radius comparisons so that pairs sitting exactly on a
// ball boundary (common in this lattice-like set) are classified stably.
constexpr double kRadiusSlack = 1e-9;

std::vector<std::vector<double>> collect_coords(const Instance& inst) {
    std::vector<std::vector<double>> out;
    out.reserve(inst.n());
    for (const Point& pt : inst.points()) out.push_back(pt.coords);
    return out;
}

}  // namespace

std::vector<double> auto_radius_grid(std::span<const std::vector<double>> points, double p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double dp = lp_dist_pow(points[i], points[j], p);
            if (dp > 0.0) lo = std::min(lo, dp);
            hi = std::max(hi, dp);
        }
    }
    std::vector<double> grid;
    if (!(hi > 0.0)) return grid;
    lo = std::pow(lo, 1.0 / p);
    hi = std::pow(hi, 1.0 / p);
    for (double r = lo; r <= hi * (1.0 + kRadiusSlack); r *= 2.0) grid.push_back(r);
    return grid;
}

std::vector<double> auto_radius_grid(const Instance& inst) {
    const auto coords = collect_coords(inst);
    return auto_radius_grid(coords, inst.params().p);
}

DoublingEstimate doubling_estimate(std::span<const std::vector<double>> points, double p,
                                   const std::vector<double>& radii) {
    if (points.empty()) throw PreconditionError("doubling_estimate: empty point set");
    for (const auto& pt : points) {
        if (pt.size() != points.front().size()) throw PreconditionError("doubling_estimate: mixed dimensions");
    }
    DoublingEstimate est;
    est.radii = radii.empty() ? auto_radius_grid(points, p) : radii;
    for (double r : est.radii) {
        if (!(r > 0.0) || !std::isfinite(r)) throw PreconditionError("doubling_estimate: radii must be positive");
    }

    const std::size_t n = points.size();
    est.per_scale.reserve(est.radii.size());
    for (double r : est.radii) est.per_scale.push_back(ScaleRow{r, 0, 0});

    std::vector<double> dist_pow(n);
    std::vector<std::size_t> centers;
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t j = 0; j < n; ++j) dist_pow[j] = lp_dist_pow(points[x], points[j], p);
        for (std::size_t s = 0; s < est.radii.size(); ++s) {
            const double r = est.radii[s];
            const double ball = abs_pow(2.0 * r * (1.0 + kRadiusSlack), p);
            const double sep = abs_pow(r * (1.0 + kRadiusSlack), p);
            centers.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (dist_pow[j] > ball) continue;
                bool separated = true;
                for (std::size_t c : centers) {
                    if (lp_dist_pow(points[j], points[c], p) <= sep) {
                        separated = false;
                        break;
                    }
                }
                if (separated) centers.push_back(j);
            }
            const auto size = static_cast<std::int64_t>(centers.size());
            if (size > est.per_scale[s].packing_size) {
                est.per_scale[s].packing_size = size;
                est.per_scale[s].worst_center = static_cast<PointId>(x);
            }
        }
    }
    est.lambda_hat = 1;
    for (const ScaleRow& row : est.per_scale) est.lambda_hat = std::max(est.lambda_hat, row.packing_size);
    est.lambda_hat_squared = est.lambda_hat * est.lambda_hat;
    return est;
}

DoublingEstimate doubling_estimate(const Instance& inst, const std::vector<double>& radii) {
    const auto coords = collect_coords(inst);
    return doubling_estimate(coords, inst.params().p, radii);
}

bool EnvelopeReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const EnvelopeRow& r) { return r.pass; });
}

EnvelopeReport envelope_check(const Instance& inst) {
    const double p = inst.params().p;
    const double eps = inst.params().eps;
    EnvelopeReport report;
    for (int level = 0; level < inst.k(); ++level) {
        for (const Edge& e : inst.edges_at_level(level)) {
            EnvelopeRow row;
            row.edge = e.id;
            row.level = level;
            row.length = inst.edge_length(e.id);
            row.bound = 2.0 * eps * row.length;
            const auto a = inst.coords(e.a);
            const auto b = inst.coords(e.b);
            for (PointId w : descendant_points(inst, e.id)) {
                row.max_distance = std::max(row.max_distance, point_segment_distance(inst.coords(w), a, b, p));
            }
            // eps = 0 collapses everything onto the segment; the strict bound degenerates to 0 == 0.
            row.pass = row.max_distance < row.bound || (row.bound == 0.0 && row.max_distance == 0.0);
            report.rows.push_back(row);
        }
    }
    return report;
}

}  // namespace laakso
