#include "laakso/embedding_lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "laakso/certifier.hpp"
#include "laakso/errors.hpp"

namespace laakso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Softmax terms below exp(-50) are dropped: even summed over 10^7 pairs they
// stay under 1e-14 of the partition sum, which is at least 1.
constexpr double kExpCutoff = -50.0;

double signed_pow(double x, double e) {
    if (e == 3.0) return x * x * x;
    if (e == 1.0) return x;
    if (e == 7.0) {
        const double s = x * x;
        return s * s * s * x;
    }
    if (e == 2.0) return x * std::fabs(x);
    return std::copysign(std::pow(std::fabs(x), e), x);
}

std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    return std::mt19937_64(seq);
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

ProjectionMatrix gaussian_matrix(std::size_t rows, int d, std::uint64_t seed) {
    if (d < 1) throw PreconditionError("projection dimension must be >= 1");
    ProjectionMatrix m;
    m.rows = rows;
    m.cols = static_cast<std::size_t>(d);
    m.values.resize(rows * m.cols);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& v : m.values) v = normal(rng) * scale;
    return m;
}

ProjectionMatrix signed_fold_matrix(std::size_t rows, int d) {
    if (d < 1 || static_cast<std::size_t>(d) > rows) throw PreconditionError("signed fold needs 1 <= d <= k+1");
    ProjectionMatrix m;
    m.rows = rows;
    m.cols = static_cast<std::size_t>(d);
    m.values.assign(rows * m.cols, 0.0);
    const std::size_t last = m.cols - 1;
    for (std::size_t i = 0; i < rows; ++i) {
        if (i < last) {
            m.values[i * m.cols + i] = 1.0;
        } else {
            m.values[i * m.cols + last] = (i - last) % 2 == 0 ? 1.0 : -1.0;
        }
    }
    return m;
}

Embedding project(const Instance& inst, const ProjectionMatrix& matrix, double q) {
    if (matrix.rows != inst.dim()) {
        throw PreconditionError("projection matrix needs " + std::to_string(inst.dim()) + " rows");
    }
    Embedding emb;
    emb.d = static_cast<int>(matrix.cols);
    emb.q = q > 0.0 ? q : inst.params().p;
    emb.images.assign(inst.n() * matrix.cols, 0.0);
    for (const Point& pt : inst.points()) {
        auto out = emb.image(pt.id);
        for (std::size_t r = 0; r < matrix.rows; ++r) {
            const double x = pt.coords[r];
            if (x == 0.0) continue;
            for (std::size_t c = 0; c < matrix.cols; ++c) out[c] += x * matrix.values[r * matrix.cols + c];
        }
    }
    emb.meta.method = "projection";
    return emb;
}

Embedding gaussian_projection(const Instance& inst, int d, std::uint64_t seed, double q) {
    Embedding emb = project(inst, gaussian_matrix(inst.dim(), d, seed), q);
    emb.meta.method = "gaussian";
    emb.meta.seed = seed;
    return emb;
}

void OptimizerConfig::validate() const {
    if (restarts < 1) throw PreconditionError("restarts must be >= 1");
    if (iterations < 1) throw PreconditionError("iterations must be >= 1");
    if (!(temperature > 0.0)) throw PreconditionError("temperature must be positive");
    // Each point moves by at most step_size times its nearest-neighbour distance,
    // so values below 1/2 can never make two images coincide.
    if (!(step_size > 0.0) || !(step_size < 0.5)) throw PreconditionError("step_size must lie in (0, 0.5)");
    if (max_pairs < 1) throw PreconditionError("max_pairs must be >= 1");
}

std::string OptimizerConfig::hash() const {
    std::ostringstream os;
    os << "seed=" << seed << ";restarts=" << restarts << ";iterations=" << iterations
       << ";step=" << format_exact(step_size) << ";decay=" << decay_name(decay)
       << ";temperature=" << format_exact(temperature) << ";init=" << init_name(init)
       << ";max_pairs=" << max_pairs;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
    return buf;
}

std::string init_name(InitKind init) {
    return init == InitKind::kGaussian ? "gaussian" : "projection-warm-start";
}

InitKind init_from_name(const std::string& name) {
    if (name == "gaussian") return InitKind::kGaussian;
    if (name == "projection-warm-start") return InitKind::kProjectionWarmStart;
    throw PreconditionError("unknown init '" + name + "'");
}

std::string decay_name(StepDecay decay) {
    return decay == StepDecay::kInverseSqrt ? "inv-sqrt" : "constant";
}

StepDecay decay_from_name(const std::string& name) {
    if (name == "inv-sqrt") return StepDecay::kInverseSqrt;
    if (name == "constant") return StepDecay::kConstant;
    throw PreconditionError("unknown decay '" + name + "'");
}

StressObjective::StressObjective(const Instance& inst, int d, double q, double temperature,
                                 std::int64_t max_pairs)
    : n_(inst.n()), d_(d), q_(q), temperature_(temperature) {
    if (d < 1) throw PreconditionError("embedding dimension must be >= 1");
    if (!(temperature > 0.0)) throw PreconditionError("temperature must be positive");
    if (!(q >= 1.0)) throw PreconditionError("target exponent must be >= 1");
    const auto total = static_cast<std::int64_t>(n_) * static_cast<std::int64_t>(n_ - 1) / 2;
    if (total > max_pairs) {
        throw CapacityError("stress objective needs " + std::to_string(total) + " pairs, budget is " +
                            std::to_string(max_pairs));
    }
    const double p = inst.params().p;
    pair_i_.reserve(static_cast<std::size_t>(total));
    pair_j_.reserve(static_cast<std::size_t>(total));
    log_source_.reserve(static_cast<std::size_t>(total));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double src = lp_dist(inst.coords(static_cast<PointId>(i)), inst.coords(static_cast<PointId>(j)), p);
            if (src == 0.0) continue;
            pair_i_.push_back(static_cast<std::uint32_t>(i));
            pair_j_.push_back(static_cast<std::uint32_t>(j));
            log_source_.push_back(std::log(src));
        }
    }
    log_ratio_.resize(log_source_.size());
    weight_.resize(log_source_.size());
}

StressObjective::Value StressObjective::evaluate(std::span<const double> images,
                                                 std::span<double> grad,
                                                 std::span<double> nearest) const {
    const auto d = static_cast<std::size_t>(d_);
    if (images.size() != n_ * d) throw PreconditionError("image buffer has the wrong size");
    if (!grad.empty() && grad.size() != images.size()) throw PreconditionError("gradient buffer has the wrong size");
    if (!nearest.empty() && nearest.size() != n_) throw PreconditionError("nearest buffer has the wrong size");

    Value out;
    const std::size_t pairs = log_source_.size();
    if (!nearest.empty()) std::fill(nearest.begin(), nearest.end(), kInf);
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    if (pairs == 0) {
        out.distortion = 1.0;
        return out;
    }

    double hi = -kInf;
    double lo = kInf;
    for (std::size_t k = 0; k < pairs; ++k) {
        const double* yi = images.data() + pair_i_[k] * d;
        const double* yj = images.data() + pair_j_[k] * d;
        double sum = 0.0;
        for (std::size_t c = 0; c < d; ++c) sum += abs_pow(yi[c] - yj[c], q_);
        if (!nearest.empty()) {
            nearest[pair_i_[k]] = std::min(nearest[pair_i_[k]], sum);
            nearest[pair_j_[k]] = std::min(nearest[pair_j_[k]], sum);
        }
        const double l = sum > 0.0 ? std::log(sum) / q_ - log_source_[k] : -kInf;
        log_ratio_[k] = l;
        hi = std::max(hi, l);
        lo = std::min(lo, l);
    }
    if (!nearest.empty()) {
        for (double& v : nearest) v = std::pow(v, 1.0 / q_);
    }
    out.max_log_ratio = hi;
    out.min_log_ratio = lo;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        out.surrogate = kInf;
        out.distortion = std::isnan(lo) || std::isnan(hi) ? std::numeric_limits<double>::quiet_NaN() : kInf;
        return out;
    }
    out.distortion = std::exp(hi - lo);

    const double t = temperature_;
    const double peak = std::max(std::fabs(hi), std::fabs(lo));
    double z = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        const double l = log_ratio_[k];
        const double up = (l - peak) / t;
        const double down = (-l - peak) / t;
        const double eu = up > kExpCutoff ? std::exp(up) : 0.0;
        const double ed = down > kExpCutoff ? std::exp(down) : 0.0;
        z += eu + ed;
        weight_[k] = eu - ed;
    }
    out.surrogate = peak + t * std::log(z);
    if (grad.empty()) return out;

    const double qm1 = q_ - 1.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        if (weight_[k] == 0.0) continue;
        const double w = weight_[k] / z;
        const std::size_t i = pair_i_[k];
        const std::size_t j = pair_j_[k];
        const double* yi = images.data() + i * d;
        const double* yj = images.data() + j * d;
        double sum = 0.0;
        for (std::size_t c = 0; c < d; ++c) sum += abs_pow(yi[c] - yj[c], q_);
        // d/dy_i of (1/q) log sum_c |delta_c|^q = sign(delta)|delta|^(q-1) / sum.
        const double scale = w / sum;
        for (std::size_t c = 0; c < d; ++c) {
            const double g = scale * signed_pow(yi[c] - yj[c], qm1);
            grad[i * d + c] += g;
            grad[j * d + c] -= g;
        }
    }
    return out;
}

namespace {

std::vector<double> initial_images(const Instance& inst, const StressObjective& objective, int d,
                                   const OptimizerConfig& cfg, int restart) {
    std::mt19937_64 rng = restart_rng(cfg.seed, restart);
    if (cfg.init == InitKind::kProjectionWarmStart) {
        if (restart == 0 && static_cast<std::size_t>(d) >= inst.dim()) {
            return identity_embedding(inst, d).images;
        }
        std::vector<double> best = gaussian_projection(inst, d, rng()).images;
        if (restart == 0) {
            std::vector<double> fold = project(inst, signed_fold_matrix(inst.dim(), d), 0.0).images;
            const double fold_distortion = objective.evaluate(fold).distortion;
            if (fold_distortion < objective.evaluate(best).distortion) best = std::move(fold);
        }
        return best;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(inst.n() * static_cast<std::size_t>(d));
    for (double& v : out) v = normal(rng);
    return out;
}

struct DescentOutcome {
    std::vector<double> best;
    double best_distortion = kInf;
    double initial_distortion = kInf;
};

DescentOutcome descend(const StressObjective& objective, std::vector<double> images,
                       const OptimizerConfig& cfg, int restart) {
    const std::size_t n = objective.n();
    const auto d = static_cast<std::size_t>(objective.d());
    std::vector<double> grad(images.size());
    std::vector<double> nearest(n);

    DescentOutcome out;
    auto value = objective.evaluate(images, grad, nearest);
    out.initial_distortion = value.distortion;
    out.best = images;
    out.best_distortion = value.distortion;
    if (!std::isfinite(value.surrogate)) return out;

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        const double eta = cfg.decay == StepDecay::kInverseSqrt
                               ? cfg.step_size / std::sqrt(static_cast<double>(iter))
                               : cfg.step_size;
        double largest = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double g2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) g2 += grad[i * d + c] * grad[i * d + c];
            largest = std::max(largest, nearest[i] * std::sqrt(g2));
        }
        if (!std::isfinite(largest)) {
            throw NumericalError("non-finite gradient at restart " + std::to_string(restart) + ", iteration " +
                                 std::to_string(iter) + " (surrogate " + std::to_string(value.surrogate) +
                                 ", distortion " + std::to_string(value.distortion) + ")");
        }
        if (largest == 0.0) break;
        const double scale = eta / largest;
        for (std::size_t i = 0; i < n; ++i) {
            const double h2 = nearest[i] * nearest[i];
            for (std::size_t c = 0; c < d; ++c) images[i * d + c] -= scale * h2 * grad[i * d + c];
        }
        value = objective.evaluate(images, grad, nearest);
        if (std::isnan(value.distortion)) {
            throw NumericalError("NaN iterate at restart " + std::to_string(restart) + ", iteration " +
                                 std::to_string(iter));
        }
        if (value.distortion < out.best_distortion) {
            out.best_distortion = value.distortion;
            out.best = images;
        }
        if (!std::isfinite(value.surrogate)) break;
    }
    return out;
}

StressResult finish(const Instance& inst, int d, const OptimizerConfig& cfg,
                    const std::vector<DescentOutcome>& outcomes) {
    StressResult result;
    result.initial_distortion = outcomes.front().initial_distortion;
    double best = kInf;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        result.restart_distortions.push_back(outcomes[r].best_distortion);
        if (outcomes[r].best_distortion < best || r == 0) {
            best = outcomes[r].best_distortion;
            result.best_restart = static_cast<int>(r);
        }
    }
    Embedding emb;
    emb.d = d;
    emb.q = inst.params().p;
    emb.images = outcomes[static_cast<std::size_t>(result.best_restart)].best;
    emb.meta = {"stress", cfg.seed, cfg.hash()};
    const DistortionReport raw = distortion(inst, emb);
    if (std::isfinite(raw.max_expansion) && raw.max_expansion > 0.0) {
        emb = normalize_nonexpansive(inst, emb);
    }
    result.report = distortion(inst, emb);
    result.embedding = std::move(emb);
    return result;
}

}  // namespace

StressResult stress_minimize(const Instance& inst, int d, const OptimizerConfig& cfg) {
    cfg.validate();
    const StressObjective objective(inst, d, inst.params().p, cfg.temperature, cfg.max_pairs);
    std::vector<DescentOutcome> outcomes;
    for (int r = 0; r < cfg.restarts; ++r) {
        outcomes.push_back(descend(objective, initial_images(inst, objective, d, cfg, r), cfg, r));
    }
    return finish(inst, d, cfg, outcomes);
}

StressResult stress_minimize_from(const Instance& inst, int d, const OptimizerConfig& cfg,
                                  std::span<const double> init) {
    cfg.validate();
    if (init.size() != inst.n() * static_cast<std::size_t>(d)) {
        throw PreconditionError("initial images have the wrong size");
    }
    const StressObjective objective(inst, d, inst.params().p, cfg.temperature, cfg.max_pairs);
    std::vector<DescentOutcome> outcomes;
    std::vector<double> nearest(inst.n());
    objective.evaluate(init, {}, nearest);
    for (int r = 0; r < cfg.restarts; ++r) {
        std::vector<double> start(init.begin(), init.end());
        if (r > 0) {
            // Jitter each point by 1% of its nearest-neighbour distance.
            std::mt19937_64 rng = restart_rng(cfg.seed, r);
            std::normal_distribution<double> normal(0.0, 0.01);
            for (std::size_t i = 0; i < inst.n(); ++i) {
                const double h = std::isfinite(nearest[i]) ? nearest[i] : 0.0;
                for (int c = 0; c < d; ++c) start[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)] += h * normal(rng);
            }
        }
        outcomes.push_back(descend(objective, std::move(start), cfg, r));
    }
    return finish(inst, d, cfg, outcomes);
}

bool SweepResult::any_failure() const {
    return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.error.empty(); });
}

namespace {

struct SweepTask {
    std::size_t instance_index = 0;
    SweepRow row;
    Embedding embedding;
};

void run_task(const Instance& inst, const SweepSpec& spec, SweepTask& task) {
    const auto start = std::chrono::steady_clock::now();
    SweepRow& row = task.row;
    try {
        if (row.method == "gaussian") {
            task.embedding = gaussian_projection(inst, row.d, row.seed);
            row.distortion = distortion(inst, task.embedding).distortion;
        } else if (row.method == "stress") {
            OptimizerConfig cfg = spec.cfg;
            cfg.seed = row.seed;
            StressResult res = stress_minimize(inst, row.d, cfg);
            row.distortion = res.report.distortion;
            task.embedding = std::move(res.embedding);
        } else {
            throw PreconditionError("unknown method '" + row.method + "'");
        }
    } catch (const std::exception& e) {
        row.error = e.what();
        row.distortion = std::numeric_limits<double>::quiet_NaN();
    }
    if (spec.record_timing) {
        row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    }
}

}  // namespace

SweepResult tradeoff_sweep(const SweepSpec& spec, const SweepEmbeddingSink& sink) {
    spec.cfg.validate();
    if (spec.ks.empty() || spec.ds.empty() || spec.ps.empty() || spec.epss.empty() || spec.seeds.empty() ||
        spec.methods.empty()) {
        throw PreconditionError("sweep grid has an empty axis");
    }
    for (int d : spec.ds) {
        if (d < 1) throw PreconditionError("sweep dimensions must be >= 1");
    }

    std::vector<std::optional<Instance>> instances;
    std::vector<std::string> build_errors;
    std::vector<SweepTask> tasks;
    for (double p : spec.ps) {
        for (double eps : spec.epss) {
            for (int k : spec.ks) {
                const Params params{p, eps, k};
                const std::size_t index = instances.size();
                std::string error;
                try {
                    instances.emplace_back(build_instance(params, spec.max_points));
                } catch (const std::exception& e) {
                    instances.emplace_back(std::nullopt);
                    error = e.what();
                }
                build_errors.push_back(error);
                std::int64_t n = 0;
                try {
                    n = closed_form_counts(k).n;
                } catch (const std::exception&) {
                }
                for (int d : spec.ds) {
                    double cert = 0.0;
                    const bool cert_ok = error.empty() && eps > 0.0;
                    if (cert_ok) cert = certified_lower_bound(*instances[index], d);
                    for (std::uint64_t seed : spec.seeds) {
                        for (const std::string& method : spec.methods) {
                            SweepTask task;
                            task.instance_index = index;
                            task.row = SweepRow{k, n, p, eps, d, method, seed, 0.0, cert, 0, cert_ok, error};
                            if (!error.empty()) task.row.distortion = std::numeric_limits<double>::quiet_NaN();
                            tasks.push_back(std::move(task));
                        }
                    }
                }
            }
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            SweepTask& task = tasks[t];
            if (!task.row.error.empty()) continue;
            run_task(*instances[task.instance_index], spec, task);
        }
    };
    const int jobs = std::max(1, spec.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult result;
    result.rows.reserve(tasks.size());
    for (SweepTask& task : tasks) {
        if (sink && task.row.error.empty()) sink(task.row, task.embedding);
        result.rows.push_back(std::move(task.row));
    }
    return result;
}

}  // namespace laakso
