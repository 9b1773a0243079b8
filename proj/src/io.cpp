#include "laakso/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "laakso/errors.hpp"

namespace laakso::io {

namespace {

json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double to_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw SchemaError("expected a number, got " + j.dump());
}

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return j.at(key);
}

void check_format(const json& j) {
    const json& format = require(j, "format");
    if (!format.is_string() || format.get<std::string>() != kFormatVersion) {
        throw SchemaError("unsupported format " + format.dump() + ", expected \"" + kFormatVersion + "\"");
    }
}

template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const Error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

json to_json(const Params& params) { return {{"p", params.p}, {"eps", params.eps}, {"k", params.k}}; }

Params params_from_json(const json& j) {
    return guarded("params", [&] {
        Params params;
        params.p = to_double(require(j, "p"));
        params.eps = to_double(require(j, "eps"));
        params.k = require(j, "k").get<int>();
        return params;
    });
}

json to_json(const Instance& inst) {
    json points = json::array();
    for (const Point& pt : inst.points()) {
        points.push_back({{"id", pt.id}, {"birth_level", pt.birth_level}, {"coords", pt.coords}});
    }
    json edges = json::array();
    for (const Edge& e : inst.edges()) {
        edges.push_back({{"id", e.id},
                         {"a", e.a},
                         {"b", e.b},
                         {"level", e.level},
                         {"parent", e.parent ? json(*e.parent) : json(nullptr)},
                         {"role", std::string(role_name(e.role))}});
    }
    json diagonals = json::array();
    for (const Diagonal& dg : inst.diagonals()) {
        diagonals.push_back({{"u", dg.u}, {"v", dg.v}, {"level", dg.level}, {"parent", dg.parent}});
    }
    return {{"format", kFormatVersion},
            {"params", to_json(inst.params())},
            {"n", inst.n()},
            {"degenerate", inst.degenerate()},
            {"points", std::move(points)},
            {"edges", std::move(edges)},
            {"diagonals", std::move(diagonals)}};
}

Instance instance_from_json(const json& j) {
    return guarded("instance", [&] {
        check_format(j);
        const Params params = params_from_json(require(j, "params"));
        std::vector<Point> points;
        for (const json& pj : require(j, "points")) {
            Point pt;
            pt.id = require(pj, "id").get<PointId>();
            pt.birth_level = require(pj, "birth_level").get<int>();
            for (const json& c : require(pj, "coords")) pt.coords.push_back(to_double(c));
            points.push_back(std::move(pt));
        }
        std::vector<Edge> edges;
        for (const json& ej : require(j, "edges")) {
            Edge e;
            e.id = require(ej, "id").get<EdgeId>();
            e.a = require(ej, "a").get<PointId>();
            e.b = require(ej, "b").get<PointId>();
            e.level = require(ej, "level").get<int>();
            const json& parent = require(ej, "parent");
            if (!parent.is_null()) e.parent = parent.get<EdgeId>();
            const auto role = role_from_name(require(ej, "role").get<std::string>());
            if (!role) throw SchemaError("unknown edge role " + ej.at("role").dump());
            e.role = *role;
            edges.push_back(e);
        }
        std::vector<Diagonal> diagonals;
        for (const json& dj : require(j, "diagonals")) {
            diagonals.push_back(Diagonal{require(dj, "u").get<PointId>(), require(dj, "v").get<PointId>(),
                                         require(dj, "level").get<int>(), require(dj, "parent").get<EdgeId>()});
        }
        return Instance::from_parts(params, std::move(points), std::move(edges), std::move(diagonals));
    });
}

json to_json(const Embedding& emb) {
    json images = json::object();
    const std::size_t n = emb.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto img = emb.image(static_cast<PointId>(i));
        images[std::to_string(i)] = std::vector<double>(img.begin(), img.end());
    }
    return {{"format", kFormatVersion},
            {"d", emb.d},
            {"q", emb.q},
            {"meta", {{"method", emb.meta.method}, {"seed", emb.meta.seed}, {"config_hash", emb.meta.config_hash}}},
            {"images", std::move(images)}};
}

Embedding embedding_from_json(const json& j) {
    return guarded("embedding", [&] {
        check_format(j);
        Embedding emb;
        emb.d = require(j, "d").get<int>();
        emb.q = to_double(require(j, "q"));
        if (emb.d < 1) throw SchemaError("embedding d must be >= 1");
        if (j.contains("meta")) {
            const json& m = j.at("meta");
            emb.meta.method = m.value("method", "");
            emb.meta.seed = m.value("seed", std::uint64_t{0});
            emb.meta.config_hash = m.value("config_hash", "");
        }
        const json& images = require(j, "images");
        if (!images.is_object()) throw SchemaError("images must be an object keyed by point id");
        const std::size_t n = images.size();
        emb.images.assign(n * static_cast<std::size_t>(emb.d), 0.0);
        std::vector<bool> seen(n, false);
        for (const auto& [key, value] : images.items()) {
            std::size_t id = 0;
            const auto res = std::from_chars(key.data(), key.data() + key.size(), id);
            if (res.ec != std::errc() || res.ptr != key.data() + key.size() || id >= n || seen[id]) {
                throw SchemaError("image ids must be exactly 0..n-1, got '" + key + "'");
            }
            seen[id] = true;
            if (!value.is_array() || value.size() != static_cast<std::size_t>(emb.d)) {
                throw SchemaError("image " + key + " must have length d");
            }
            for (std::size_t c = 0; c < value.size(); ++c) {
                emb.images[id * static_cast<std::size_t>(emb.d) + c] = to_double(value[c]);
            }
        }
        return emb;
    });
}

json to_json(const DistortionReport& r) {
    return {{"max_expansion", number(r.max_expansion)},
            {"max_contraction", number(r.max_contraction)},
            {"distortion", number(r.distortion)},
            {"argmax_expansion_pair", {r.argmax_expansion_pair.first, r.argmax_expansion_pair.second}},
            {"argmax_contraction_pair", {r.argmax_contraction_pair.first, r.argmax_contraction_pair.second}},
            {"pairs", r.pairs}};
}

json to_json(const CertifierParams& cp) {
    return {{"d", cp.d},
            {"D", number(cp.D)},
            {"p", cp.p},
            {"eps", cp.eps},
            {"alpha", cp.alpha},
            {"c", cp.c},
            {"eps_threshold", cp.eps_threshold},
            {"applicable", cp.applicable}};
}

json to_json(const PotentialWitness& w) {
    json chain = json::array();
    for (const ChainLink& link : w.chain) chain.push_back({{"edge", link.edge}, {"phi", link.phi}});
    json out = {{"chain", std::move(chain)},
                {"increments", w.increments},
                {"violated", w.violated},
                {"violation_level", w.violation_level ? json(*w.violation_level) : json(nullptr)},
                {"cap_exceeded", w.cap_exceeded},
                {"tolerance_warnings", w.tolerance_warnings}};
    if (w.violation) {
        out["violation"] = {{"edge", w.violation->edge},
                            {"level", w.violation->level},
                            {"parent_phi", w.violation->parent_phi},
                            {"best_child_phi", w.violation->best_child_phi},
                            {"required", w.violation->required},
                            {"message", w.violation->message}};
    }
    return out;
}

json to_json(const OptimizerConfig& cfg) {
    return {{"seed", cfg.seed},
            {"restarts", cfg.restarts},
            {"iterations", cfg.iterations},
            {"step_size", cfg.step_size},
            {"decay", decay_name(cfg.decay)},
            {"temperature", cfg.temperature},
            {"init", init_name(cfg.init)},
            {"max_pairs", cfg.max_pairs}};
}

OptimizerConfig optimizer_config_from_json(const json& j, const OptimizerConfig& base) {
    return guarded("optimizer", [&] {
        if (!j.is_object()) throw SchemaError("optimizer config must be an object");
        OptimizerConfig cfg = base;
        cfg.seed = j.value("seed", cfg.seed);
        cfg.restarts = j.value("restarts", cfg.restarts);
        cfg.iterations = j.value("iterations", cfg.iterations);
        cfg.step_size = j.value("step_size", cfg.step_size);
        cfg.temperature = j.value("temperature", cfg.temperature);
        cfg.max_pairs = j.value("max_pairs", cfg.max_pairs);
        try {
            if (j.contains("decay")) cfg.decay = decay_from_name(j.at("decay").get<std::string>());
            if (j.contains("init")) cfg.init = init_from_name(j.at("init").get<std::string>());
        } catch (const PreconditionError& e) {
            throw SchemaError(e.what());
        }
        return cfg;
    });
}

json to_json(const SweepRow& row) {
    json out = {{"k", row.k},
                {"n", row.n},
                {"p", row.p},
                {"eps", row.eps},
                {"d", row.d},
                {"method", row.method},
                {"seed", row.seed},
                {"distortion", number(row.distortion)},
                {"cert_lb", row.cert_lb},
                {"wall_ms", row.wall_ms},
                {"certificate_preconditions", row.certificate_preconditions}};
    if (!row.error.empty()) out["error"] = row.error;
    return out;
}

json to_json(const DoublingEstimate& est) {
    json scales = json::array();
    for (const ScaleRow& row : est.per_scale) {
        scales.push_back({{"radius", row.radius}, {"worst_center", row.worst_center}, {"packing_size", row.packing_size}});
    }
    return {{"lambda_hat", est.lambda_hat},
            {"lambda_hat_squared", est.lambda_hat_squared},
            {"radii", est.radii},
            {"per_scale", std::move(scales)},
            {"estimator",
             "max over centers x and radii r of a greedy maximal r-separated subset of B(x,2r); "
             "upper-bounds the r-ball covering count of each probed ball. lambda_hat_squared is the "
             "packing-squared doubling bound."}};
}

json to_json(const EnvelopeReport& report) {
    json rows = json::array();
    for (const EnvelopeRow& r : report.rows) {
        rows.push_back({{"edge", r.edge},
                        {"level", r.level},
                        {"length", r.length},
                        {"max_distance", r.max_distance},
                        {"bound", r.bound},
                        {"pass", r.pass}});
    }
    return {{"all_pass", report.all_pass()}, {"rows", std::move(rows)}};
}

SweepSpec sweep_spec_from_json(const json& j) {
    return guarded("sweep grid", [&] {
        if (!j.is_object()) throw SchemaError("sweep grid must be a JSON object");
        SweepSpec spec;
        spec.ks = require(j, "k").get<std::vector<int>>();
        spec.ds = require(j, "d").get<std::vector<int>>();
        spec.ps = require(j, "p").get<std::vector<double>>();
        spec.epss = require(j, "eps").get<std::vector<double>>();
        spec.seeds = require(j, "seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("methods")) spec.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("optimizer")) spec.cfg = optimizer_config_from_json(j.at("optimizer"), spec.cfg);
        if (j.contains("max_points")) spec.max_points = j.at("max_points").get<std::int64_t>();
        if (spec.ks.empty() || spec.ds.empty() || spec.ps.empty() || spec.epss.empty() || spec.seeds.empty() ||
            spec.methods.empty()) {
            throw SchemaError("sweep grid axes must be non-empty");
        }
        for (const auto& m : spec.methods) {
            if (m != "gaussian" && m != "stress") throw SchemaError("unknown sweep method '" + m + "'");
        }
        return spec;
    });
}

json to_json(const SweepSpec& spec) {
    return {{"k", spec.ks},
            {"d", spec.ds},
            {"p", spec.ps},
            {"eps", spec.epss},
            {"seeds", spec.seeds},
            {"methods", spec.methods},
            {"optimizer", to_json(spec.cfg)},
            {"max_points", spec.max_points}};
}

std::string distortion_csv_header() { return "n,k,p,eps,d,method,seed,expansion,contraction,distortion\n"; }

std::string distortion_csv_row(const Instance& inst, const Embedding& emb, const DistortionReport& r) {
    std::ostringstream os;
    os << inst.n() << ',' << inst.k() << ',' << format_double(inst.params().p) << ','
       << format_double(inst.params().eps) << ',' << emb.d << ',' << emb.meta.method << ',' << emb.meta.seed
       << ',' << format_double(r.max_expansion) << ',' << format_double(r.max_contraction) << ','
       << format_double(r.distortion) << '\n';
    return os.str();
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream os;
    os << "k,n,p,eps,d,method,seed,distortion,cert_lb,wall_ms\n";
    for (const SweepRow& r : result.rows) {
        os << r.k << ',' << r.n << ',' << format_double(r.p) << ',' << format_double(r.eps) << ',' << r.d << ','
           << r.method << ',' << r.seed << ',' << format_double(r.distortion) << ',' << format_double(r.cert_lb)
           << ',' << r.wall_ms << '\n';
    }
    return os.str();
}

std::string doubling_csv(const DoublingEstimate& est) {
    std::ostringstream os;
    os << "radius,worst_center,packing_size\n";
    for (const ScaleRow& r : est.per_scale) {
        os << format_double(r.radius) << ',' << r.worst_center << ',' << r.packing_size << '\n';
    }
    return os.str();
}

std::string envelope_csv(const EnvelopeReport& report) {
    std::ostringstream os;
    os << "edge,level,length,max_distance,bound,pass\n";
    for (const EnvelopeRow& r : report.rows) {
        os << r.edge << ',' << r.level << ',' << format_double(r.length) << ',' << format_double(r.max_distance)
           << ',' << format_double(r.bound) << ',' << (r.pass ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_json_file(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    out << text;
    if (!out) throw SchemaError("write to '" + path + "' failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace laakso::io
