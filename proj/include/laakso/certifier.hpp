#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "laakso/instance.hpp"
#include "laakso/metric.hpp"

namespace laakso {

/// Relative tolerance used for every potential comparison.
inline constexpr double kPotentialRelTol = 1e-9;

/// Constants of the potential-growth step for a target dimension d and a
/// distortion bound D.
struct CertifierParams {
    int d = 1;
    double D = 1.0;
    double p = 4.0;
    double eps = 0.0;            ///< gadget width of the audited instance
    double alpha = 0.0;          ///< (eps / D)^2
    double c = 0.0;              ///< 4^(p / (p - 2))
    double eps_threshold = 0.0;  ///< d^(-1/p) D^(-2/(p-2)) / c
    bool applicable = false;     ///< eps <= eps_threshold
};

/// 4^(p / (p - 2)).
double lemma_constant(double p);

/// Throws PreconditionError for d < 1, D < 1, p <= 2 or eps <= 0.
CertifierParams make_certifier_params(int d, double D, double p, double eps);

/// |f(a) - f(b)|_2^2 / |a - b|_p^2 for edge `id`.
double edge_potential(const Instance& inst, const Embedding& emb, EdgeId id);

/// d^(1 - 2/p), the largest potential a non-expansive map into l_p^d allows.
double potential_cap(int d, double p);

/// Largest gadget width for which the growth step holds:
/// d^(-1/p) D^(-2/(p-2)) / 4^(p/(p-2)). Throws PreconditionError when the
/// result is not below 1/8.
double epsilon_for(int d, double D, double p);

/// Per-coordinate offsets of the diagonal endpoints from the parent midpoint,
/// in units of the parent's l_p length:
///   f_j(w) = (f_j(a) + f_j(b)) / 2 + delta_j(w) |a - b|_p.
struct Deltas {
    std::vector<double> u;
    std::vector<double> v;
};

Deltas compute_deltas(const Instance& inst, const Embedding& emb, const Diagonal& diag);

/// Intermediate quantities of the growth argument for one parent edge,
/// reported for diagnostics. All are normalized by the parent length.
struct StepTrace {
    double phi_prime_ua = 0.0;  ///< 4 |f(u) - f(a)|^2 / |a-b|^2
    double phi_prime_ub = 0.0;
    double phi_prime_as = 0.0;  ///< 16 |f(a) - f(s)|^2 / |a-b|^2
    double phi_prime_us = 0.0;
    double delta_u_sq = 0.0;  ///< sum_j delta_j(u)^2
    double delta_v_sq = 0.0;
};

struct StepResult {
    EdgeId child = 0;
    double phi = 0.0;         ///< potential of the chosen child
    double parent_phi = 0.0;
    bool within_tolerance_only = false;  ///< passed only thanks to the tolerance
    StepTrace trace;
};

struct ViolationReport {
    EdgeId edge = 0;
    int level = 0;
    double parent_phi = 0.0;
    double best_child_phi = 0.0;
    double required = 0.0;
    std::string message;
};

using StepOutcome = std::variant<StepResult, ViolationReport>;

/// Audits potential growth over the edges of one (instance, embedding) pair.
///
/// Construction checks the preconditions once: eps > 0, the embedding targets
/// the instance's own exponent, it is non-expansive, its measured distortion is
/// at most cp.D, and eps <= cp.eps_threshold. Each failure throws
/// PreconditionError, never a violation.
class PotentialAuditor {
public:
    PotentialAuditor(const Instance& inst, const Embedding& emb, const CertifierParams& cp);

    const DistortionReport& report() const noexcept { return report_; }
    const CertifierParams& params() const noexcept { return cp_; }

    double potential(EdgeId id) const;

    /// Picks the child with the largest potential and checks it grew by at
    /// least alpha (minus tolerance). Leaves throw PreconditionError.
    StepOutcome step(EdgeId id) const;

private:
    const Instance& inst_;
    const Embedding& emb_;
    CertifierParams cp_;
    DistortionReport report_;
};

StepOutcome lemma_step(const Instance& inst, const Embedding& emb, EdgeId id,
                       const CertifierParams& cp);

struct ChainLink {
    EdgeId edge = 0;
    double phi = 0.0;
};

struct PotentialWitness {
    std::vector<ChainLink> chain;      ///< levels 0 .. k (shorter if violated)
    std::vector<double> increments;    ///< chain[i].phi - chain[i-1].phi
    bool violated = false;
    std::optional<int> violation_level;  ///< level of the parent edge that failed
    std::optional<ViolationReport> violation;
    bool cap_exceeded = false;
    int tolerance_warnings = 0;
};

/// Follows the growth step from the root edge down to level k.
PotentialWitness witness_chain(const Instance& inst, const Embedding& emb,
                               const CertifierParams& cp);

/// Lower bound on the distortion of any embedding of `inst` into l_p^d:
///   min(D_max, eps sqrt(k) d^(1/p - 1/2)),  D_max = (d^(-1/p) / (c eps))^((p-2)/2),
/// or 0 when that minimum is below 1.
double certified_lower_bound(const Instance& inst, int d);

/// Same bound from the parameters alone, for depths too large to materialize.
double certified_lower_bound(const Params& params, int d);

}  // namespace laakso
