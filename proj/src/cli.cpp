#include "netflow/cli.hpp"

#include "netflow/absorption.hpp"
#include "netflow/approximation.hpp"
#include "netflow/checks.hpp"
#include "netflow/errors.hpp"
#include "netflow/io.hpp"
#include "netflow/resolvent.hpp"
#include "netflow/semigroup.hpp"
#include "netflow/version.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <sstream>

namespace netflow {

using json = nlohmann::json;

namespace {

/// A computed bound exceeded the requested tolerance; artifacts are still written.
class ToleranceFailure : public Error {
public:
    using Error::Error;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(what, 0, "expected an integer, got '" + text + "'");
}

// ---------------------------------------------------------------------------
// shared plumbing

struct Inputs {
    std::shared_ptr<const MetricGraph> graph;
    std::optional<VelocityProfile> velocities;

    bool unit() const { return !velocities || velocities->is_unit(); }
};

Inputs load_graph(const RunConfig& c) {
    if (c.graph.empty()) throw ArgumentError("--graph is required");
    auto gf = read_graph_file(c.graph);
    Inputs in{gf.graph, gf.velocities};
    return in;
}

NetworkState load_state(const RunConfig& c) {
    if (c.state.empty()) throw ArgumentError("--state is required");
    return read_state_file(c.state);
}

std::string out_path(const RunConfig& c, const std::string& file) {
    const std::string dir = c.out_dir.value_or(".");
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / file).string();
}

json config_echo(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    if (!c.graph.empty()) j["graph"] = c.graph;
    if (!c.state.empty()) j["state"] = c.state;
    if (!c.absorption.empty()) j["absorption"] = c.absorption;
    if (!c.test_functions.empty()) j["test_functions"] = c.test_functions;
    if (c.command == "simulate" || c.command == "absorb" || c.command == "approx") j["t"] = c.t;
    if (c.command == "resolvent" || c.command == "approx") j["lambda"] = c.lambda;
    if (c.tol) j["tol"] = *c.tol;
    j["grid"] = c.grid;
    if (c.command == "absorb") {
        j["order"] = c.order;
        j["quad_steps"] = c.quad_steps;
    }
    if (c.command == "simulate" || c.command == "absorb") j["log_steps"] = c.log_steps;
    if (c.command == "approx") {
        j["levels"] = c.levels;
        j["method"] = c.method;
    }
    if (c.command == "resolvent") j["mode"] = c.mode;
    if (c.command == "check") {
        j["suite"] = c.suite;
        j["seed"] = c.seed;
    }
    return j;
}

json metadata(const RunConfig& c) {
    json j;
    j["netflow_version"] = kVersion;
    j["config"] = config_echo(c);
    return j;
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

json log_entry(const Rational& t, double sup, double mass, double residual) {
    json j;
    j["t"] = to_double(t);
    j["t_exact"] = to_string(t);
    j["sup_norm"] = sup;
    j["total_mass"] = mass;
    j["boundary_residual"] = residual;
    return j;
}

void require_grid(const RunConfig& c) {
    if (c.grid < 1) throw ArgumentError("--grid must be >= 1");
    if (c.log_steps < 1) throw ArgumentError("--log-steps must be >= 1");
}

// ---------------------------------------------------------------------------
// verbs

int cmd_validate(const RunConfig& c, std::ostream& out) {
    auto in = load_graph(c);
    auto rep = validate_graph(*in.graph);
    out << in.graph->name() << ": " << rep.summary() << "\n";
    if (in.velocities)
        out << "velocities: c_min " << format_real(in.velocities->c_min()) << ", c_max "
            << format_real(in.velocities->c_max()) << (in.velocities->all_exact() ? ", all rational" : ", not all rational")
            << "\n";
    if (c.out_dir) {
        json j = metadata(c);
        j["valid"] = rep.ok();
        j["summary"] = rep.summary();
        write_json(out_path(c, "validate.json"), j);
    }
    return rep.ok() ? kExitOk : kExitValidation;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    require_grid(c);
    auto in = load_graph(c);
    const NetworkState f = load_state(c);
    const Rational t = parse_time(c.t);

    std::function<NetworkState(const Rational&)> evolve;
    std::shared_ptr<const AdjacencyOperator> boundary_op;
    std::string path;
    if (in.unit()) {
        auto op = std::make_shared<const AdjacencyOperator>(build_adjacency(in.graph));
        evolve = [op, &f](const Rational& s) { return evolve_unit(*op, f, s); };
        boundary_op = op;
        path = "unit";
    } else {
        auto scaled = std::make_shared<const AdjacencyOperator>(build_adjacency(in.graph, in.velocities));
        auto plan = std::make_shared<const SubdivisionPlan>(subdivide(in.graph, *in.velocities));
        evolve = [plan, &f](const Rational& s) { return evolve_rational(*plan, f, s); };
        boundary_op = scaled;
        path = "rational, c = " + to_string(plan->c) + ", " + std::to_string(plan->subdivided_edge_count()) +
               " sub-edges";
    }

    std::ostringstream log;
    NetworkState final_state;
    for (int k = 0; k <= c.log_steps; ++k) {
        const Rational tk = t * ratio(k, c.log_steps);
        const NetworkState s = evolve(tk);
        log << log_entry(tk, to_double(sup_norm(s)), to_double(total_mass(s)), boundary_residual(s, *boundary_op))
                   .dump()
            << "\n";
        if (k == c.log_steps) final_state = s;
    }

    const Rational drift = total_mass(final_state) - total_mass(f);
    write_text_file(out_path(c, "simulate.csv"), format_csv(sample(convert_state<double>(final_state), c.grid)));
    write_text_file(out_path(c, "simulate.state"), format_state(final_state, "evolved"));
    write_text_file(out_path(c, "simulate.log.jsonl"), log.str());
    json j = metadata(c);
    j["path"] = path;
    j["result"] = {{"pieces", final_state.pieces()},
                   {"sup_norm", to_double(sup_norm(final_state))},
                   {"total_mass", to_double(total_mass(final_state))},
                   {"mass_drift_exact", to_string(drift)},
                   {"boundary_residual", boundary_residual(final_state, *boundary_op)}};
    j["bounds"] = {{"exact", true}, {"error_bound", 0.0}};
    write_json(out_path(c, "simulate.json"), j);
    out << "simulate: " << path << ", t = " << to_string(t) << ", " << final_state.pieces() << " pieces, sup norm "
        << format_real(to_double(sup_norm(final_state))) << "\n";
    return kExitOk;
}

int cmd_absorb(const RunConfig& c, std::ostream& out) {
    require_grid(c);
    auto in = load_graph(c);
    const NetworkState f = load_state(c);
    if (c.absorption.empty()) throw ArgumentError("--absorption is required");
    const AbsorptionProfile q{read_real_state_file(c.absorption)};
    const Rational t = parse_time(c.t);
    AbsorbingOptions opts;
    opts.order = c.order;
    opts.quad_steps = c.quad_steps;
    opts.grid = c.grid;

    std::function<AbsorbingResult(const Rational&)> evolve;
    std::shared_ptr<const AdjacencyOperator> boundary_op;
    if (in.unit()) {
        auto op = std::make_shared<const AdjacencyOperator>(build_adjacency(in.graph));
        evolve = [op, &q, &f, opts](const Rational& s) { return evolve_absorbing(*op, q, f, s, opts); };
        boundary_op = op;
    } else {
        boundary_op = std::make_shared<const AdjacencyOperator>(build_adjacency(in.graph, in.velocities));
        auto plan = std::make_shared<const SubdivisionPlan>(subdivide(in.graph, *in.velocities));
        evolve = [plan, &q, &f, opts](const Rational& s) { return evolve_absorbing(*plan, q, f, s, opts); };
    }

    std::ostringstream log;
    AbsorbingResult res;
    for (int k = 0; k <= c.log_steps; ++k) {
        const Rational tk = t * ratio(k, c.log_steps);
        AbsorbingResult r = evolve(tk);
        log << log_entry(tk, sup_norm(r.state), total_mass(r.state), boundary_residual(r.state, *boundary_op)).dump()
            << "\n";
        if (k == c.log_steps) res = std::move(r);
    }

    const double total = res.tail_bound + res.quadrature_bound.value_or(0.0);
    write_text_file(out_path(c, "absorb.csv"), format_csv(res.samples));
    write_text_file(out_path(c, "absorb.log.jsonl"), log.str());
    json j = metadata(c);
    j["result"] = {{"sup_norm", sup_norm(res.state)},
                   {"total_mass", total_mass(res.state)},
                   {"boundary_residual", boundary_residual(res.state, *boundary_op)}};
    j["bounds"] = {{"tail_bound", res.tail_bound},
                   {"quadrature_bound", res.quadrature_bound ? json(*res.quadrature_bound) : json(nullptr)},
                   {"growth_bound", res.growth_bound},
                   {"order", res.order},
                   {"quad_steps", res.quad_steps},
                   {"total_bound", total}};
    if (!res.quadrature_bound)
        j["bounds"]["note"] = "quadrature error is only bounded for a uniform constant rate";
    write_json(out_path(c, "absorb.json"), j);
    out << "absorb: t = " << to_string(t) << ", tail bound " << format_real(res.tail_bound) << ", quadrature bound "
        << (res.quadrature_bound ? format_real(*res.quadrature_bound) : std::string("n/a")) << "\n";
    if (c.tol && total > *c.tol)
        throw ToleranceFailure("error bound " + format_real(total) + " exceeds --tol " + format_real(*c.tol));
    return kExitOk;
}

int cmd_resolvent(const RunConfig& c, std::ostream& out) {
    if (c.grid < 1) throw ArgumentError("--grid must be >= 1");
    auto in = load_graph(c);
    const NetworkState f = load_state(c);
    const auto [re, im] = parse_lambda(c.lambda);
    const Complex lambda(re, im);
    ResolventOptions opts;
    opts.tol = c.tol.value_or(opts.tol);
    opts.grid = c.grid;

    std::string mode = c.mode;
    if (mode == "auto") mode = in.unit() ? "unit" : "general";
    if (mode != "unit" && mode != "general") throw ArgumentError("--mode must be unit, general or auto");
    if (mode == "unit" && !in.unit()) throw ArgumentError("--mode unit needs unit velocities; this graph has others");

    ResolventResult res;
    std::optional<AdjacencyOperator> op;
    if (mode == "unit") {
        op.emplace(build_adjacency(in.graph));
        res = resolvent_unit(*op, lambda, f, opts);
    } else {
        VelocityProfile vel;
        if (in.velocities) {
            vel = *in.velocities;
        } else {
            for (EdgeId id : in.graph->edge_ids()) vel.set(id, Velocity::exact_value(Rational(1)));
        }
        op.emplace(build_adjacency(in.graph, vel));
        res = resolvent_general(in.graph, vel, lambda, f, opts);
    }
    const IdentityReport rep = resolvent_identity_check(res.samples, f, lambda, *op);

    write_text_file(out_path(c, "resolvent.csv"), format_csv(res.samples));
    json j = metadata(c);
    j["mode"] = mode;
    j["bounds"] = {{"K_used", res.k_used}, {"tail_bound", res.tail_bound}};
    j["bounds"]["neumann_terms"] = res.neumann_terms ? json(*res.neumann_terms) : json(nullptr);
    j["bounds"]["norm_Blambda"] = res.norm_b_lambda ? json(*res.norm_b_lambda) : json(nullptr);
    j["bounds"]["norm_Blambda_weighted"] =
        res.norm_b_lambda_weighted ? json(*res.norm_b_lambda_weighted) : json(nullptr);
    j["result"] = {{"sup_norm", sup_norm_complex(res.samples)},
                   {"trace_residual", rep.trace_residual},
                   {"interior_residual", rep.interior_residual}};
    write_json(out_path(c, "resolvent.json"), j);
    out << "resolvent: " << mode << " formula, lambda = " << format_real(re) << (im >= 0 ? "+" : "")
        << format_real(im) << "i, terms " << res.k_used << ", tail bound " << format_real(res.tail_bound) << "\n";
    return kExitOk;
}

int cmd_approx(const RunConfig& c, std::ostream& out) {
    auto in = load_graph(c);
    if (!in.velocities) throw ArgumentError("approx needs a graph with velocity lines");
    const NetworkState f = load_state(c);
    const Rational t = parse_time(c.t);
    const auto [re, im] = parse_lambda(c.lambda);
    const ApproxMethod method = parse_approx_method(c.method);
    const std::vector<int> levels = c.levels.empty() ? default_levels(method) : parse_levels(c.levels);
    if (auto rep = validate_graph(*in.graph); !rep.ok())
        throw MalformedGraphError("graph '" + in.graph->name() + "' failed validation: " + rep.summary());
    const auto schedule = make_schedule(*in.graph, *in.velocities, levels, method);

    std::vector<TestFunction> gs;
    for (const auto& path : c.test_functions) gs.push_back(read_state_file(path));
    if (gs.empty())
        for (EdgeId id : in.graph->edge_ids())
            gs.push_back(TestFunction::constant(SparseVector<Rational>::from_entries({{id, Rational(1)}})));

    ResolventOptions ropts;
    ropts.grid = c.grid;
    const auto semi = semigroup_convergence(in.graph, *in.velocities, f, t, gs, schedule);
    const auto res = resolvent_convergence(in.graph, *in.velocities, {re, im}, f, schedule, ropts);

    std::ostringstream csv;
    csv << "level,velocity_error,subdivided_edges,semigroup_error";
    for (std::size_t k = 0; k < gs.size(); ++k) csv << ",weak_error_" << k + 1;
    csv << ",resolvent_error\n";
    bool resolvent_decreasing = true;
    std::vector<bool> weak_decreasing(gs.size(), true);
    json rows = json::array();
    for (std::size_t r = 0; r < semi.rows.size(); ++r) {
        const auto& a = semi.rows[r];
        const auto& b = res.rows[r];
        csv << a.level << "," << format_real(a.velocity_error) << "," << a.subdivided_edges << ","
            << format_real(*a.semigroup_error);
        for (double w : a.weak_errors) csv << "," << format_real(w);
        csv << "," << format_real(*b.resolvent_error) << "\n";
        if (r > 0) {
            resolvent_decreasing = resolvent_decreasing && *b.resolvent_error < *res.rows[r - 1].resolvent_error;
            for (std::size_t k = 0; k < gs.size(); ++k)
                weak_decreasing[k] = weak_decreasing[k] && a.weak_errors[k] < semi.rows[r - 1].weak_errors[k];
        }
        json v;
        for (const auto& [id, vel] : a.velocities.entries()) v[std::to_string(id)] = to_string(*vel.exact);
        rows.push_back({{"level", a.level}, {"velocities", v}});
    }
    write_text_file(out_path(c, "approx.csv"), csv.str());

    json j = metadata(c);
    j["schedule"] = rows;
    j["summary"] = {{"exact_reference", semi.exact_reference},
                    {"resolvent_strictly_decreasing", resolvent_decreasing},
                    {"weak_strictly_decreasing", weak_decreasing},
                    {"hoelder_bound_holds", hoelder_holds(semi)},
                    {"test_function_norms", semi.test_norms},
                    {"final_resolvent_error", *res.rows.back().resolvent_error},
                    {"fit_slope", res.fit_slope ? json(*res.fit_slope) : json(nullptr)},
                    {"fit_residual", res.fit_residual ? json(*res.fit_residual) : json(nullptr)}};
    write_json(out_path(c, "approx.json"), j);
    out << "approx: " << semi.rows.size() << " levels (" << to_string(method) << "), final resolvent error "
        << format_real(*res.rows.back().resolvent_error) << "\n";
    if (c.tol && *res.rows.back().resolvent_error > *c.tol)
        throw ToleranceFailure("final resolvent error exceeds --tol " + format_real(*c.tol));
    return kExitOk;
}

int cmd_check(const RunConfig& c, std::ostream& out) {
    std::string fixtures = c.fixture_dir;
    if (fixtures.empty()) throw ArgumentError("--fixtures is required for check");
    const auto results = run_checks(c.suite, c.seed, fixtures);
    int failed = 0;
    json list = json::array();
    for (const auto& r : results) {
        out << (r.pass ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " (" << r.detail << ")\n";
        if (!r.pass) ++failed;
        list.push_back({{"suite", r.suite}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    out << results.size() - failed << "/" << results.size() << " checks passed\n";
    if (c.out_dir) {
        json j = metadata(c);
        j["results"] = list;
        write_json(out_path(c, "check.json"), j);
    }
    return failed == 0 ? kExitOk : kExitValidation;
}

}  // namespace

std::pair<double, double> parse_lambda(const std::string& text) {
    const auto comma = text.find(',');
    auto part = [&](const std::string& s) {
        const std::string v = trim(s);
        if (v.empty()) throw ParseError("--lambda", 0, "empty component in '" + text + "'");
        return to_double(parse_exact_decimal(v));
    };
    if (comma == std::string::npos) return {part(text), 0.0};
    return {part(text.substr(0, comma)), part(text.substr(comma + 1))};
}

std::vector<int> parse_levels(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int a = parse_int(trim(text.substr(0, dots)), "--levels");
        const int b = parse_int(trim(text.substr(dots + 2)), "--levels");
        if (b < a) throw ArgumentError("--levels range is empty: " + text);
        for (int n = a; n <= b; ++n) out.push_back(n);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(trim(item), "--levels"));
    if (out.empty()) throw ArgumentError("--levels is empty");
    return out;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.command == "validate") return cmd_validate(config, out);
        if (config.command == "simulate") return cmd_simulate(config, out);
        if (config.command == "absorb") return cmd_absorb(config, out);
        if (config.command == "resolvent") return cmd_resolvent(config, out);
        if (config.command == "approx") return cmd_approx(config, out);
        if (config.command == "check") return cmd_check(config, out);
        err << "netflow: unknown command '" << config.command << "'\n";
        return kExitMalformed;
    } catch (const ParseError& e) {
        err << "netflow: malformed input: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const PrecisionError& e) {
        err << "netflow: malformed input: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const ToleranceFailure& e) {
        err << "netflow: tolerance not met: " << e.what() << "\n";
        return kExitTolerance;
    } catch (const TruncationError& e) {
        err << "netflow: tolerance not met: " << e.what() << "\n";
        return kExitTolerance;
    } catch (const ContractionViolationError& e) {
        err << "netflow: tolerance not met: " << e.what() << "\n";
        return kExitTolerance;
    } catch (const OverflowError& e) {
        err << "netflow: numeric limit: " << e.what() << "\n";
        return kExitTolerance;
    } catch (const Error& e) {
        err << "netflow: invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "netflow: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace netflow
