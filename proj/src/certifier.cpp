#include "laakso/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "laakso/errors.hpp"

namespace laakso {

namespace {

double sq_l2(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - y[j];
        acc += diff * diff;
    }
    return acc;
}

double phi_tolerance(double scale) { return kPotentialRelTol * std::max(1.0, std::fabs(scale)); }

}  // namespace

double lemma_constant(double p) {
    if (!(p > 2.0)) throw PreconditionError("lemma constant requires p > 2");
    return std::pow(4.0, p / (p - 2.0));
}

double potential_cap(int d, double p) {
    if (d < 1) throw PreconditionError("potential_cap: d must be >= 1");
    if (!(p > 2.0)) throw PreconditionError("potential_cap: p must exceed 2");
    return std::pow(static_cast<double>(d), 1.0 - 2.0 / p);
}

namespace {

double raw_threshold(int d, double D, double p) {
    return std::pow(static_cast<double>(d), -1.0 / p) * std::pow(D, -2.0 / (p - 2.0)) / lemma_constant(p);
}

void check_dDp(int d, double D, double p) {
    if (d < 1) throw PreconditionError("d must be >= 1");
    if (!(D >= 1.0) || !std::isfinite(D)) throw PreconditionError("D must be a finite real >= 1");
    if (!(p > 2.0)) throw PreconditionError("p must exceed 2 (the growth argument fails at p = 2)");
}

}  // namespace

double epsilon_for(int d, double D, double p) {
    check_dDp(d, D, p);
    const double eps = raw_threshold(d, D, p);
    if (!(eps < 0.125)) {
        throw PreconditionError("epsilon_for: resulting eps " + std::to_string(eps) + " is not below 1/8");
    }
    return eps;
}

CertifierParams make_certifier_params(int d, double D, double p, double eps) {
    check_dDp(d, D, p);
    if (!(eps > 0.0)) throw PreconditionError("certifier requires eps > 0");
    CertifierParams cp;
    cp.d = d;
    cp.D = D;
    cp.p = p;
    cp.eps = eps;
    cp.alpha = (eps / D) * (eps / D);
    cp.c = lemma_constant(p);
    cp.eps_threshold = raw_threshold(d, D, p);
    cp.applicable = eps <= cp.eps_threshold;
    return cp;
}

double edge_potential(const Instance& inst, const Embedding& emb, EdgeId id) {
    const Edge& e = inst.edge(id);
    const double len = lp_dist(inst.coords(e.a), inst.coords(e.b), inst.params().p);
    if (len == 0.0) throw PreconditionError("edge " + std::to_string(id) + " has zero source length");
    return sq_l2(emb.image(e.a), emb.image(e.b)) / (len * len);
}

Deltas compute_deltas(const Instance& inst, const Embedding& emb, const Diagonal& diag) {
    const Edge& parent = inst.edge(diag.parent);
    const double len = lp_dist(inst.coords(parent.a), inst.coords(parent.b), inst.params().p);
    if (len == 0.0) throw PreconditionError("diagonal parent has zero length");
    const auto fa = emb.image(parent.a);
    const auto fb = emb.image(parent.b);
    const auto fu = emb.image(diag.u);
    const auto fv = emb.image(diag.v);
    Deltas out;
    out.u.resize(static_cast<std::size_t>(emb.d));
    out.v.resize(static_cast<std::size_t>(emb.d));
    for (std::size_t j = 0; j < out.u.size(); ++j) {
        const double mid = fa[j] / 2.0 + fb[j] / 2.0;
        out.u[j] = (fu[j] - mid) / len;
        out.v[j] = (fv[j] - mid) / len;
    }
    return out;
}

PotentialAuditor::PotentialAuditor(const Instance& inst, const Embedding& emb,
                                   const CertifierParams& cp)
    : inst_(inst), emb_(emb), cp_(cp) {
    check_covers(inst, emb);
    const Params& params = inst.params();
    if (!(params.eps > 0.0)) throw PreconditionError("audit requires an instance with eps > 0");
    if (emb.q != params.p) {
        throw PreconditionError("audit requires the embedding to target l_p with the instance's p");
    }
    if (emb.d != cp.d) {
        throw PreconditionError("certifier dimension " + std::to_string(cp.d) +
                                " does not match embedding dimension " + std::to_string(emb.d));
    }
    if (cp.p != params.p) throw PreconditionError("certifier p does not match instance p");
    report_ = distortion(inst, emb);
    if (!(report_.max_expansion <= 1.0 + kPotentialRelTol)) {
        throw PreconditionError("embedding is not non-expansive (max expansion " +
                                std::to_string(report_.max_expansion) + "); normalize it first");
    }
    if (!(report_.distortion <= cp.D * (1.0 + kPotentialRelTol))) {
        throw PreconditionError("measured distortion " + std::to_string(report_.distortion) +
                                " exceeds D = " + std::to_string(cp.D));
    }
    const double threshold = raw_threshold(cp.d, cp.D, params.p);
    if (!(params.eps <= threshold)) {
        throw PreconditionError("instance eps " + std::to_string(params.eps) +
                                " exceeds the growth threshold " + std::to_string(threshold));
    }
}

double PotentialAuditor::potential(EdgeId id) const { return edge_potential(inst_, emb_, id); }

StepOutcome PotentialAuditor::step(EdgeId id) const {
    const Edge& parent = inst_.edge(id);
    const auto kids = inst_.children(id);
    if (kids.empty()) throw PreconditionError("edge " + std::to_string(id) + " is a leaf");

    StepResult best;
    best.parent_phi = potential(id);
    best.phi = -1.0;
    for (const Edge& child : kids) {
        const double phi = potential(child.id);
        if (phi > best.phi) {
            best.phi = phi;
            best.child = child.id;
        }
    }

    const Diagonal& dg = inst_.diagonal_of(id);
    const double len = inst_.edge_length(id);
    const double len_sq = len * len;
    const PointId s = kids[0].b;
    best.trace.phi_prime_ua = 4.0 * sq_l2(emb_.image(dg.u), emb_.image(parent.a)) / len_sq;
    best.trace.phi_prime_ub = 4.0 * sq_l2(emb_.image(dg.u), emb_.image(parent.b)) / len_sq;
    best.trace.phi_prime_as = 16.0 * sq_l2(emb_.image(parent.a), emb_.image(s)) / len_sq;
    best.trace.phi_prime_us = 16.0 * sq_l2(emb_.image(dg.u), emb_.image(s)) / len_sq;
    const Deltas deltas = compute_deltas(inst_, emb_, dg);
    for (double x : deltas.u) best.trace.delta_u_sq += x * x;
    for (double x : deltas.v) best.trace.delta_v_sq += x * x;

    const double required = best.parent_phi + cp_.alpha;
    if (best.phi >= required) return best;
    if (best.phi >= required - phi_tolerance(best.parent_phi)) {
        best.within_tolerance_only = true;
        return best;
    }
    ViolationReport v;
    v.edge = id;
    v.level = parent.level;
    v.parent_phi = best.parent_phi;
    v.best_child_phi = best.phi;
    v.required = required;
    v.message = "no child of edge " + std::to_string(id) + " reaches potential " +
                std::to_string(required) + " (best " + std::to_string(best.phi) +
                "); preconditions held, so this indicates a bug or a precondition breach";
    return v;
}

StepOutcome lemma_step(const Instance& inst, const Embedding& emb, EdgeId id,
                       const CertifierParams& cp) {
    return PotentialAuditor(inst, emb, cp).step(id);
}

PotentialWitness witness_chain(const Instance& inst, const Embedding& emb,
                               const CertifierParams& cp) {
    const PotentialAuditor auditor(inst, emb, cp);
    const double cap = potential_cap(cp.d, inst.params().p);
    const double cap_tol = phi_tolerance(cap);

    PotentialWitness w;
    EdgeId current = inst.root().id;
    w.chain.push_back({current, auditor.potential(current)});
    for (int level = 0; level < inst.k(); ++level) {
        const StepOutcome outcome = auditor.step(current);
        if (const auto* v = std::get_if<ViolationReport>(&outcome)) {
            w.violated = true;
            w.violation_level = level;
            w.violation = *v;
            break;
        }
        const auto& step = std::get<StepResult>(outcome);
        if (step.within_tolerance_only) ++w.tolerance_warnings;
        w.increments.push_back(step.phi - w.chain.back().phi);
        w.chain.push_back({step.child, step.phi});
        current = step.child;
    }
    for (const ChainLink& link : w.chain) {
        if (link.phi > cap + cap_tol) w.cap_exceeded = true;
    }
    return w;
}

double certified_lower_bound(const Instance& inst, int d) { return certified_lower_bound(inst.params(), d); }

double certified_lower_bound(const Params& params, int d) {
    if (!(params.eps > 0.0)) throw PreconditionError("certified_lower_bound requires eps > 0");
    if (d < 1) throw PreconditionError("certified_lower_bound: d must be >= 1");
    const double p = params.p;
    const double c = lemma_constant(p);
    const double dd = static_cast<double>(d);
    const double d_max = std::pow(std::pow(dd, -1.0 / p) / (c * params.eps), (p - 2.0) / 2.0);
    const double growth = params.eps * std::sqrt(static_cast<double>(params.k)) * std::pow(dd, 1.0 / p - 0.5);
    const double bound = std::min(d_max, growth);
    return bound < 1.0 ? 0.0 : bound;
}

}  // namespace laakso
