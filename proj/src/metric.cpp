#include "laakso/metric.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "laakso/errors.hpp"

namespace laakso {

double lp_dist_pow(std::span<const double> x, std::span<const double> y, double p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += abs_pow(x[j] - y[j], p);
    return acc;
}

double lp_dist(std::span<const double> x, std::span<const double> y, double p) {
    if (x.size() != y.size()) {
        throw PreconditionError("lp_dist: length mismatch (" + std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
    }
    if (!(p >= 1.0)) throw PreconditionError("lp_dist: p must be >= 1");
    double scale = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) scale = std::max(scale, std::fabs(x[j] - y[j]));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += abs_pow((x[j] - y[j]) / scale, p);
    return scale * std::pow(acc, 1.0 / p);
}

double lp_norm(std::span<const double> x, double p) {
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double acc = 0.0;
    for (double v : x) acc += abs_pow(v / scale, p);
    return scale * std::pow(acc, 1.0 / p);
}

Embedding identity_embedding(const Instance& inst, int d) {
    const auto dim = static_cast<int>(inst.dim());
    if (d < 0) d = dim;
    if (d < dim) throw PreconditionError("identity_embedding: d must be at least k+1");
    Embedding emb;
    emb.d = d;
    emb.q = inst.params().p;
    emb.images.assign(inst.n() * static_cast<std::size_t>(d), 0.0);
    for (const Point& pt : inst.points()) {
        std::copy(pt.coords.begin(), pt.coords.end(), emb.image(pt.id).begin());
    }
    emb.meta.method = "identity";
    return emb;
}

void check_covers(const Instance& inst, const Embedding& emb) {
    if (emb.d < 1) throw SchemaError("embedding dimension must be positive");
    if (emb.images.size() != inst.n() * static_cast<std::size_t>(emb.d)) {
        throw SchemaError("embedding has " + std::to_string(emb.images.size()) + " values, expected " +
                          std::to_string(inst.n()) + " x " + std::to_string(emb.d));
    }
    if (!(emb.q >= 1.0)) throw SchemaError("embedding norm exponent must be >= 1");
}

DistortionReport distortion(const Instance& inst, const Embedding& emb, double source_p,
                            double image_q) {
    check_covers(inst, emb);
    DistortionReport r;
    const auto n = static_cast<PointId>(inst.n());
    for (PointId i = 0; i < n; ++i) {
        const auto xi = inst.coords(i);
        const auto yi = emb.image(i);
        for (PointId j = i + 1; j < n; ++j) {
            const double src = lp_dist(xi, inst.coords(j), source_p);
            if (src == 0.0) continue;
            const double img = lp_dist(yi, emb.image(j), image_q);
            ++r.pairs;
            const double expansion = img / src;
            const double contraction = img == 0.0 ? std::numeric_limits<double>::infinity() : src / img;
            if (expansion > r.max_expansion) {
                r.max_expansion = expansion;
                r.argmax_expansion_pair = {i, j};
            }
            if (contraction > r.max_contraction) {
                r.max_contraction = contraction;
                r.argmax_contraction_pair = {i, j};
            }
        }
    }
    if (r.pairs == 0) {
        r.max_expansion = 1.0;
        r.max_contraction = 1.0;
        r.distortion = 1.0;
        return r;
    }
    if (std::isinf(r.max_contraction)) {
        r.distortion = std::numeric_limits<double>::infinity();
    } else {
        r.distortion = r.max_expansion * r.max_contraction;
    }
    return r;
}

DistortionReport distortion(const Instance& inst, const Embedding& emb) {
    return distortion(inst, emb, inst.params().p, emb.q);
}

Embedding normalize_nonexpansive(const Instance& inst, const Embedding& emb) {
    const DistortionReport r = distortion(inst, emb);
    if (!(r.max_expansion > 0.0) || !std::isfinite(r.max_expansion)) {
        throw PreconditionError("normalize_nonexpansive: max expansion must be finite and positive");
    }
    Embedding out = emb;
    if (r.max_expansion == 1.0) return out;
    const double scale = 1.0 / r.max_expansion;
    for (double& v : out.images) v *= scale;
    return out;
}

double point_segment_distance(std::span<const double> x, std::span<const double> a,
                              std::span<const double> b, double p) {
    if (x.size() != a.size() || a.size() != b.size()) {
        throw PreconditionError("point_segment_distance: length mismatch");
    }
    if (std::equal(a.begin(), a.end(), b.begin())) {
        throw PreconditionError("point_segment_distance: degenerate segment");
    }
    std::vector<double> diff(x.size());
    auto at = [&](double theta) {
        for (std::size_t j = 0; j < x.size(); ++j) diff[j] = x[j] - a[j] - theta * (b[j] - a[j]);
        return lp_norm(diff, p);
    };
    // The norm is convex along a line, so ternary search converges to the minimum.
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < kTernaryIterations; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (at(m1) <= at(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    return std::min({at(0.5 * (lo + hi)), at(0.0), at(1.0)});
}

}  // namespace laakso
