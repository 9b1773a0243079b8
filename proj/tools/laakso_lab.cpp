// laakso-lab: build instances, certify embeddings, run embedding experiments
// and probe the doubling behaviour of the recursive l_p point set.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "laakso/certifier.hpp"
#include "laakso/doubling.hpp"
#include "laakso/embedding_lab.hpp"
#include "laakso/errors.hpp"
#include "laakso/instance.hpp"
#include "laakso/io.hpp"
#include "laakso/metric.hpp"

namespace {

using laakso::ExitCode;
using laakso::io::json;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("LAAKSO_LAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw laakso::PreconditionError(std::string("LAAKSO_LAB_SEED is not an unsigned integer: ") + env);
        }
    }
    return 1;
}

json run_config(const std::string& command, json options) {
    return {{"command", command}, {"format", laakso::io::kFormatVersion}, {"options", std::move(options)}};
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        laakso::io::write_file(path, text);
    }
}

int report_error(ExitCode code, const std::string& kind, const std::string& message) {
    const json err = {{"error", kind}, {"message", message}, {"exit_code", static_cast<int>(code)}};
    std::cerr << err.dump() << "\n";
    return static_cast<int>(code);
}

struct BuildOptions {
    double p = 0.0;
    std::optional<double> eps;
    std::vector<double> eps_for;
    int k = 0;
    std::string out;
    std::int64_t max_points = laakso::kDefaultMaxPoints;
};

int run_build(const BuildOptions& opt) {
    double eps = 0.0;
    if (!opt.eps_for.empty()) {
        const int d = static_cast<int>(opt.eps_for[0]);
        if (static_cast<double>(d) != opt.eps_for[0]) throw laakso::PreconditionError("--eps-for d must be an integer");
        if (opt.eps_for[2] != opt.p) throw laakso::PreconditionError("--eps-for p must equal --p");
        eps = laakso::epsilon_for(d, opt.eps_for[1], opt.eps_for[2]);
    } else if (opt.eps) {
        eps = *opt.eps;
    } else {
        throw laakso::PreconditionError("one of --eps or --eps-for is required");
    }
    const laakso::Params params{opt.p, eps, opt.k};
    const laakso::Instance inst = laakso::build_instance(params, opt.max_points);

    json options = {{"p", opt.p}, {"eps", eps}, {"k", opt.k}, {"max_points", opt.max_points}};
    if (!opt.eps_for.empty()) options["eps_for"] = opt.eps_for;
    json doc = laakso::io::to_json(inst);
    doc["run_config"] = run_config("build", options);
    emit(opt.out, laakso::io::dump(doc));

    json levels = json::array();
    for (int level = 0; level <= inst.k(); ++level) {
        double lo = INFINITY;
        double hi = 0.0;
        for (const auto& e : inst.edges_at_level(level)) {
            const double len = inst.edge_length(e.id);
            lo = std::min(lo, len);
            hi = std::max(hi, len);
        }
        levels.push_back({{"level", level},
                          {"edges", inst.edges_at_level(level).size()},
                          {"diagonals", inst.diagonals_at_level(level).size()},
                          {"min_length", lo},
                          {"max_length", hi}});
    }
    const json summary = {{"n", inst.n()}, {"params", laakso::io::to_json(params)},
                          {"degenerate", inst.degenerate()}, {"levels", std::move(levels)}};
    (opt.out.empty() || opt.out == "-" ? std::cerr : std::cout) << laakso::io::dump(summary);
    return 0;
}

struct CertifyOptions {
    std::string instance;
    std::string embedding;
    bool normalize = false;
    std::optional<double> D;
    std::string out;
};

int run_certify(const CertifyOptions& opt) {
    const laakso::Instance inst = laakso::io::instance_from_json(laakso::io::read_json_file(opt.instance));
    laakso::Embedding emb = laakso::io::embedding_from_json(laakso::io::read_json_file(opt.embedding));
    laakso::check_covers(inst, emb);
    const auto& params = inst.params();

    json options = {{"instance", opt.instance}, {"embedding", opt.embedding}, {"normalize", opt.normalize}};
    if (opt.D) options["D"] = *opt.D;
    json doc = {{"format", laakso::io::kFormatVersion},
                {"run_config", run_config("certify", options)},
                {"params", laakso::io::to_json(params)}};

    auto precondition = [&](const std::string& why) {
        doc["status"] = "precondition";
        doc["reason"] = why;
        emit(opt.out, laakso::io::dump(doc));
        return report_error(ExitCode::kPrecondition, "precondition", why);
    };

    if (emb.q != params.p) return precondition("embedding exponent q differs from the instance exponent p");
    if (!(params.eps > 0.0)) return precondition("certification requires eps > 0");
    const laakso::DistortionReport raw = laakso::distortion(inst, emb);
    if (!std::isfinite(raw.distortion)) return precondition("embedding collapses distinct points");
    if (raw.max_expansion > 1.0 + laakso::kPotentialRelTol) {
        if (!opt.normalize) return precondition("embedding is expansive; rerun with --normalize");
        emb = laakso::normalize_nonexpansive(inst, emb);
    }
    const laakso::DistortionReport measured = laakso::distortion(inst, emb);
    doc["measured_distortion"] = measured.distortion;
    doc["distortion_report"] = laakso::io::to_json(measured);
    doc["cap"] = laakso::potential_cap(emb.d, params.p);
    doc["certified_lower_bound"] = laakso::certified_lower_bound(inst, emb.d);

    const double D = opt.D.value_or(std::max(1.0, measured.distortion));
    if (D < measured.distortion * (1.0 - laakso::kPotentialRelTol)) {
        return precondition("--D is below the measured distortion");
    }
    const laakso::CertifierParams cp = laakso::make_certifier_params(emb.d, D, params.p, params.eps);
    doc["cp"] = laakso::io::to_json(cp);
    if (!cp.applicable) return precondition("instance eps exceeds the growth threshold for this d and D");

    const laakso::PotentialWitness witness = laakso::witness_chain(inst, emb, cp);
    doc["witness"] = laakso::io::to_json(witness);
    const bool hard = witness.violated || witness.cap_exceeded;
    doc["status"] = hard ? "violation" : "ok";
    emit(opt.out, laakso::io::dump(doc));
    return hard ? static_cast<int>(ExitCode::kViolation) : 0;
}

struct EmbedOptions {
    std::string instance;
    int d = 1;
    std::string method = "stress";
    std::optional<std::uint64_t> seed;
    laakso::OptimizerConfig cfg;
    std::string init = "projection-warm-start";
    std::string decay = "inv-sqrt";
    std::string out;
    std::string csv;
};

int run_embed(EmbedOptions opt) {
    const laakso::Instance inst = laakso::io::instance_from_json(laakso::io::read_json_file(opt.instance));
    opt.cfg.seed = opt.seed.value_or(default_seed());
    opt.cfg.init = laakso::init_from_name(opt.init);
    opt.cfg.decay = laakso::decay_from_name(opt.decay);

    laakso::Embedding emb;
    if (opt.method == "gaussian") {
        emb = laakso::gaussian_projection(inst, opt.d, opt.cfg.seed);
    } else if (opt.method == "stress") {
        emb = laakso::stress_minimize(inst, opt.d, opt.cfg).embedding;
    } else if (opt.method == "identity") {
        emb = laakso::identity_embedding(inst, opt.d);
    } else {
        throw laakso::PreconditionError("unknown method '" + opt.method + "'");
    }
    const laakso::DistortionReport report = laakso::distortion(inst, emb);

    json options = {{"instance", opt.instance}, {"d", opt.d}, {"method", opt.method},
                    {"optimizer", laakso::io::to_json(opt.cfg)}};
    json doc = laakso::io::to_json(emb);
    doc["run_config"] = run_config("embed", options);
    doc["distortion_report"] = laakso::io::to_json(report);
    emit(opt.out, laakso::io::dump(doc));
    if (!opt.csv.empty()) {
        laakso::io::write_file(opt.csv, laakso::io::distortion_csv_header() +
                                            laakso::io::distortion_csv_row(inst, emb, report));
    }
    if (!opt.out.empty() && opt.out != "-") std::cout << laakso::io::dump(laakso::io::to_json(report));
    return 0;
}

struct SweepOptions {
    std::string grid;
    std::string csv;
    std::string json_out;
    std::string persist_dir;
    int jobs = 1;
    bool timing = false;
};

int run_sweep(const SweepOptions& opt) {
    json grid = laakso::io::read_json_file(opt.grid);
    if (grid.is_object() && !grid.contains("seeds")) grid["seeds"] = json::array({default_seed()});
    laakso::SweepSpec spec = laakso::io::sweep_spec_from_json(grid);
    spec.jobs = opt.jobs;
    spec.record_timing = opt.timing;

    laakso::SweepEmbeddingSink sink;
    if (!opt.persist_dir.empty()) {
        std::filesystem::create_directories(opt.persist_dir);
        sink = [&](const laakso::SweepRow& row, const laakso::Embedding& emb) {
            const std::string name = "k" + std::to_string(row.k) + "_p" + laakso::io::format_double(row.p) + "_eps" +
                                     laakso::io::format_double(row.eps) + "_d" + std::to_string(row.d) + "_" +
                                     row.method + "_seed" + std::to_string(row.seed) + ".json";
            json doc = laakso::io::to_json(emb);
            doc["run_config"] = run_config("sweep", laakso::io::to_json(spec));
            laakso::io::write_file((std::filesystem::path(opt.persist_dir) / name).string(), laakso::io::dump(doc));
        };
    }
    const laakso::SweepResult result = laakso::tradeoff_sweep(spec, sink);

    bool unsound = false;
    json rows = json::array();
    for (const auto& row : result.rows) {
        rows.push_back(laakso::io::to_json(row));
        if (row.certificate_preconditions && row.error.empty() && row.distortion < row.cert_lb - 1e-9) unsound = true;
    }
    const std::string csv = laakso::io::sweep_csv(result);
    if (!opt.csv.empty()) laakso::io::write_file(opt.csv, csv);
    const json doc = {{"format", laakso::io::kFormatVersion},
                      {"run_config", run_config("sweep", {{"grid", laakso::io::to_json(spec)},
                                                          {"timing", opt.timing}})},
                      {"rows", std::move(rows)},
                      {"certificate_unsound", unsound}};
    if (!opt.json_out.empty()) laakso::io::write_file(opt.json_out, laakso::io::dump(doc));
    if (opt.csv.empty() && opt.json_out.empty()) std::cout << csv;
    if (unsound) return report_error(ExitCode::kViolation, "violation", "a sweep row beats the certified lower bound");
    if (result.any_failure()) return report_error(ExitCode::kViolation, "cell-failure", "one or more sweep cells failed");
    return 0;
}

struct ProbeOptions {
    std::string instance;
    std::vector<double> radii;
    std::string json_out;
    std::string csv;
};

int run_doubling(const ProbeOptions& opt) {
    const laakso::Instance inst = laakso::io::instance_from_json(laakso::io::read_json_file(opt.instance));
    const laakso::DoublingEstimate est = laakso::doubling_estimate(inst, opt.radii);
    json doc = laakso::io::to_json(est);
    doc["format"] = laakso::io::kFormatVersion;
    doc["params"] = laakso::io::to_json(inst.params());
    doc["run_config"] = run_config("doubling", {{"instance", opt.instance}, {"radii", opt.radii}});
    emit(opt.json_out, laakso::io::dump(doc));
    if (!opt.csv.empty()) laakso::io::write_file(opt.csv, laakso::io::doubling_csv(est));
    return 0;
}

int run_envelope(const ProbeOptions& opt) {
    const laakso::Instance inst = laakso::io::instance_from_json(laakso::io::read_json_file(opt.instance));
    const laakso::EnvelopeReport report = laakso::envelope_check(inst);
    json doc = laakso::io::to_json(report);
    doc["format"] = laakso::io::kFormatVersion;
    doc["params"] = laakso::io::to_json(inst.params());
    doc["run_config"] = run_config("envelope", {{"instance", opt.instance}});
    emit(opt.json_out, laakso::io::dump(doc));
    if (!opt.csv.empty()) laakso::io::write_file(opt.csv, laakso::io::envelope_csv(report));
    return report.all_pass() ? 0 : static_cast<int>(ExitCode::kViolation);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recursive l_p instances, potential certificates and embedding experiments"};
    app.require_subcommand(1);

    BuildOptions build;
    auto* build_cmd = app.add_subcommand("build", "Construct an instance and write it as JSON");
    build_cmd->add_option("--p", build.p, "Norm exponent (> 2)")->required();
    auto* eps_opt = build_cmd->add_option("--eps", build.eps, "Gadget width in [0, 1/8)");
    auto* eps_for_opt = build_cmd->add_option("--eps-for", build.eps_for, "Derive eps from target d, D, p")
                            ->expected(3);
    eps_opt->excludes(eps_for_opt);
    build_cmd->add_option("--k", build.k, "Recursion depth")->required();
    build_cmd->add_option("--out", build.out, "Instance JSON path")->required();
    build_cmd->add_option("--max-points", build.max_points, "Capacity budget");

    CertifyOptions certify;
    auto* certify_cmd = app.add_subcommand("certify", "Audit potential growth for an embedding");
    certify_cmd->add_option("--instance", certify.instance)->required();
    certify_cmd->add_option("--embedding", certify.embedding)->required();
    certify_cmd->add_flag("--normalize", certify.normalize, "Rescale to non-expansive before auditing");
    certify_cmd->add_option("--D", certify.D, "Distortion bound (defaults to the measured distortion)");
    certify_cmd->add_option("--out", certify.out, "Certificate JSON path (stdout if omitted)");

    EmbedOptions embed;
    auto* embed_cmd = app.add_subcommand("embed", "Embed an instance into l_p^d");
    embed_cmd->add_option("--instance", embed.instance)->required();
    embed_cmd->add_option("--d", embed.d)->required();
    embed_cmd->add_option("--method", embed.method)->check(CLI::IsMember({"gaussian", "stress", "identity"}));
    embed_cmd->add_option("--seed", embed.seed, "Defaults to LAAKSO_LAB_SEED or 1");
    embed_cmd->add_option("--restarts", embed.cfg.restarts);
    embed_cmd->add_option("--iterations", embed.cfg.iterations);
    embed_cmd->add_option("--step-size", embed.cfg.step_size);
    embed_cmd->add_option("--temperature", embed.cfg.temperature);
    embed_cmd->add_option("--init", embed.init)->check(CLI::IsMember({"gaussian", "projection-warm-start"}));
    embed_cmd->add_option("--decay", embed.decay)->check(CLI::IsMember({"inv-sqrt", "constant"}));
    embed_cmd->add_option("--out", embed.out, "Embedding JSON path (stdout if omitted)");
    embed_cmd->add_option("--csv", embed.csv, "Also write a one-row distortion CSV");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the distortion/dimension tradeoff grid");
    sweep_cmd->add_option("--grid", sweep.grid, "Grid spec JSON")->required();
    sweep_cmd->add_option("--csv", sweep.csv);
    sweep_cmd->add_option("--json", sweep.json_out);
    sweep_cmd->add_option("--persist-dir", sweep.persist_dir, "Write every cell's embedding here");
    sweep_cmd->add_option("--jobs", sweep.jobs)->check(CLI::PositiveNumber);
    sweep_cmd->add_flag("--timing", sweep.timing, "Fill wall_ms (makes output run-dependent)");

    ProbeOptions doubling;
    auto* doubling_cmd = app.add_subcommand("doubling", "Greedy-packing doubling estimate");
    doubling_cmd->add_option("--instance", doubling.instance)->required();
    doubling_cmd->add_option("--radii", doubling.radii, "Radii to probe (default: automatic grid)");
    doubling_cmd->add_option("--json", doubling.json_out);
    doubling_cmd->add_option("--csv", doubling.csv);

    ProbeOptions envelope;
    auto* envelope_cmd = app.add_subcommand("envelope", "Descendant envelope check");
    envelope_cmd->add_option("--instance", envelope.instance)->required();
    envelope_cmd->add_option("--json", envelope.json_out);
    envelope_cmd->add_option("--csv", envelope.csv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error(ExitCode::kPrecondition, "usage", e.what());
    }

    try {
        if (*build_cmd) return run_build(build);
        if (*certify_cmd) return run_certify(certify);
        if (*embed_cmd) return run_embed(embed);
        if (*sweep_cmd) return run_sweep(sweep);
        if (*doubling_cmd) return run_doubling(doubling);
        if (*envelope_cmd) return run_envelope(envelope);
    } catch (const laakso::Error& e) {
        return report_error(e.code(), e.kind(), e.what());
    } catch (const std::exception& e) {
        return report_error(ExitCode::kSchema, "io", e.what());
    }
    return 0;
}
