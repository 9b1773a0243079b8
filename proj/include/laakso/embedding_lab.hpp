#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "laakso/instance.hpp"
#include "laakso/metric.hpp"

namespace laakso {

/// Dense (k+1) x d projection applied as images = coords * matrix.
struct ProjectionMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  ///< row-major
};

/// Independent N(0, 1) / sqrt(d) entries drawn from a seeded mt19937_64.
ProjectionMatrix gaussian_matrix(std::size_t rows, int d, std::uint64_t seed);

/// Applies an explicit matrix. Test hook for the projection baseline.
Embedding project(const Instance& inst, const ProjectionMatrix& matrix, double q);

/// Random Gaussian projection baseline, images evaluated under `q`
/// (defaults to the instance exponent when q <= 0).
Embedding gaussian_projection(const Instance& inst, int d, std::uint64_t seed, double q = 0.0);

/// Keeps coordinates 0 .. d-2 and folds every remaining coordinate i onto the
/// last axis with sign (-1)^(i-d+1). Requires d <= k+1.
ProjectionMatrix signed_fold_matrix(std::size_t rows, int d);

enum class InitKind { kGaussian, kProjectionWarmStart };

enum class StepDecay { kInverseSqrt, kConstant };

struct OptimizerConfig {
    std::uint64_t seed = 1;
    int restarts = 5;
    int iterations = 300;
    double step_size = 0.2;  ///< largest relative point move of the first iteration
    StepDecay decay = StepDecay::kInverseSqrt;
    double temperature = 0.01;
    InitKind init = InitKind::kProjectionWarmStart;
    std::int64_t max_pairs = 20'000'000;

    /// Throws PreconditionError unless restarts, iterations >= 1 and
    /// temperature, step_size > 0.
    void validate() const;
    /// Stable hex digest of every field, recorded in embedding metadata.
    std::string hash() const;
};

std::string init_name(InitKind init);
InitKind init_from_name(const std::string& name);
std::string decay_name(StepDecay decay);
StepDecay decay_from_name(const std::string& name);

/// Smooth surrogate of log-distortion over all pairs with positive source
/// distance:
///   L(Y) = T log sum_ij [exp(l_ij / T) + exp(-l_ij / T)],
///   l_ij = log |y_i - y_j|_q - log |x_i - x_j|_p,
/// a soft maximum of |l_ij| that tends to max |l_ij| as T -> 0.
class StressObjective {
public:
    StressObjective(const Instance& inst, int d, double q, double temperature,
                    std::int64_t max_pairs = 20'000'000);

    struct Value {
        double surrogate = 0.0;
        double max_log_ratio = 0.0;  ///< largest l_ij
        double min_log_ratio = 0.0;  ///< smallest l_ij
        double distortion = 0.0;     ///< exp(max - min), +inf on collapse
    };

    /// Evaluates at `images` (n*d, row-major). When `grad` is non-empty it
    /// receives dL/dY; `nearest` (size n, optional) receives each point's
    /// smallest image distance.
    Value evaluate(std::span<const double> images, std::span<double> grad = {},
                   std::span<double> nearest = {}) const;

    std::size_t n() const noexcept { return n_; }
    int d() const noexcept { return d_; }
    double temperature() const noexcept { return temperature_; }

private:
    std::size_t n_;
    int d_;
    double q_;
    double temperature_;
    std::vector<std::uint32_t> pair_i_, pair_j_;
    std::vector<double> log_source_;
    mutable std::vector<double> log_ratio_;
    mutable std::vector<double> weight_;
};

struct StressResult {
    Embedding embedding;  ///< best iterate across restarts, normalized non-expansive
    DistortionReport report;
    double initial_distortion = 0.0;  ///< distortion of the first restart's starting point
    int best_restart = 0;
    std::vector<double> restart_distortions;
};

/// Gradient descent on the soft-max log-ratio surrogate with restarts.
///
/// Warm starts: with d >= k+1 the first restart begins at the identity; below
/// that it begins at the better of the signed fold and a seeded Gaussian
/// projection. Later restarts use fresh seeded projections.
///
/// Each step moves point i by -eta_t h_i^2 grad_i, where h_i is the point's
/// current nearest image distance, then rescales so the largest relative move
/// |step_i| / h_i equals eta_t (= step_size / sqrt(t) by default). The true
/// distortion of every iterate is tracked and the best one is returned.
StressResult stress_minimize(const Instance& inst, int d, const OptimizerConfig& cfg);

/// Same as above but starting every restart from `init` (n*d values).
StressResult stress_minimize_from(const Instance& inst, int d, const OptimizerConfig& cfg,
                                  std::span<const double> init);

/// Sweep cells default to one restart: the seed axis already supplies them.
inline OptimizerConfig sweep_optimizer_defaults() {
    OptimizerConfig cfg;
    cfg.restarts = 1;
    return cfg;
}

struct SweepSpec {
    std::vector<int> ks;
    std::vector<int> ds;
    std::vector<double> ps;
    std::vector<double> epss;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> methods{"gaussian", "stress"};
    OptimizerConfig cfg = sweep_optimizer_defaults();
    bool record_timing = false;
    int jobs = 1;
    std::int64_t max_points = 20'000;
};

struct SweepRow {
    int k = 0;
    std::int64_t n = 0;
    double p = 0.0;
    double eps = 0.0;
    int d = 0;
    std::string method;
    std::uint64_t seed = 0;
    double distortion = 0.0;
    double cert_lb = 0.0;
    std::int64_t wall_ms = 0;
    bool certificate_preconditions = false;  ///< eps > 0 and p > 2 at the cell
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool any_failure() const;
};

/// Hook invoked with each finished row's embedding, e.g. for persistence.
using SweepEmbeddingSink = std::function<void(const SweepRow&, const Embedding&)>;

/// Runs every (p, eps, k, d, seed, method) cell. Rows come out in that
/// nesting order regardless of `jobs`.
SweepResult tradeoff_sweep(const SweepSpec& spec, const SweepEmbeddingSink& sink = {});

}  // namespace laakso
