#include "netflow/checks.hpp"

#include "netflow/absorption.hpp"
#include "netflow/approximation.hpp"
#include "netflow/errors.hpp"
#include "netflow/io.hpp"
#include "netflow/random_instances.hpp"
#include "netflow/resolvent.hpp"
#include "netflow/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

namespace netflow {

namespace {

struct Recorder {
    std::string suite;
    std::vector<CheckResult>& out;

    void record(const std::string& name, bool pass, const std::string& detail) {
        out.push_back({suite, name, pass, detail});
    }

    /// Runs `body`; an escaping exception fails the check with its message.
    void run(const std::string& name, const std::function<std::string(bool&)>& body) {
        bool pass = true;
        try {
            std::string detail = body(pass);
            record(name, pass, detail);
        } catch (const std::exception& e) {
            record(name, false, std::string("exception: ") + e.what());
        }
    }
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

VelocityProfile random_velocities(InstanceRng& rng, const MetricGraph& g) {
    VelocityProfile vel;
    for (EdgeId id : g.edge_ids())
        vel.set(id, Velocity::exact_value(rng.rational(Rational(1, 3), Rational(3), 4)));
    return vel;
}

void fixtures_suite(Recorder& r, const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        r.record("fixture directory", false, "not a directory: " + dir);
        return;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    int seen = 0;
    for (const auto& p : files) {
        const std::string ext = p.extension().string();
        const std::string name = p.filename().string();
        if (ext == ".graph") {
            ++seen;
            r.run("graph " + name, [&](bool& pass) {
                auto gf = read_graph_file(p.string());
                auto rep = validate_graph(*gf.graph);
                pass = rep.ok();
                return rep.summary();
            });
        } else if (ext == ".state" || ext == ".testfn") {
            ++seen;
            r.run("state " + name, [&](bool& pass) {
                auto f = read_state_file(p.string());
                pass = f.pieces() >= 1;
                return std::to_string(f.pieces()) + " pieces on " + std::to_string(f.support().size()) + " edges";
            });
        } else if (ext == ".absorption") {
            ++seen;
            r.run("absorption " + name, [&](bool& pass) {
                auto q = read_real_state_file(p.string());
                pass = q.pieces() >= 1;
                return std::to_string(q.pieces()) + " pieces";
            });
        }
    }
    r.record("fixture count", seen > 0, std::to_string(seen) + " files checked");
}

void semigroup_suite(Recorder& r, std::uint64_t seed) {
    constexpr int trials = 60;
    r.run("semigroup law, contraction, mass, positivity", [&](bool& pass) {
        InstanceRng rng(seed);
        int bad = 0;
        for (int k = 0; k < trials; ++k) {
            auto g = random_graph(rng);
            auto op = build_adjacency(g);
            RandomStateOptions so;
            so.nonnegative = rng.coin();
            auto f = random_state(rng, *g, so);
            const Rational s = random_time(rng, Rational(3)), t = random_time(rng, Rational(3));
            const auto ts = evolve_unit(op, f, t + s);
            const bool ok = evolve_unit(op, evolve_unit(op, f, s), t) == ts && sup_norm(ts) <= sup_norm(f) &&
                            total_mass(ts) == total_mass(f) && (!so.nonnegative || is_nonnegative(ts));
            if (!ok) ++bad;
        }
        pass = bad == 0;
        return std::to_string(trials - bad) + "/" + std::to_string(trials) + " trials exact";
    });
    r.run("rational velocities: semigroup law and mass", [&](bool& pass) {
        InstanceRng rng(seed + 1);
        int bad = 0;
        const int n = 20;
        for (int k = 0; k < n; ++k) {
            RandomGraphOptions go;
            go.max_edges = 6;
            auto g = random_graph(rng, go);
            auto vel = random_velocities(rng, *g);
            auto plan = subdivide(g, vel);
            auto f = random_state(rng, *g);
            const Rational s = random_time(rng, Rational(2), 4), t = random_time(rng, Rational(2), 4);
            const auto ts = evolve_rational(plan, f, t + s);
            if (!(evolve_rational(plan, evolve_rational(plan, f, s), t) == ts && total_mass(ts) == total_mass(f)))
                ++bad;
        }
        pass = bad == 0;
        return std::to_string(n - bad) + "/" + std::to_string(n) + " trials exact";
    });
    r.run("finite propagation on the lazy path", [&](bool& pass) {
        auto path = std::make_shared<const MetricGraph>(MetricGraph::lazy(
            "path", [](EdgeId j) { return Column{{j + 1, Rational(1)}}; },
            [](EdgeId j) { return Edge{j, "u" + std::to_string(j), "u" + std::to_string(j + 1)}; }));
        AdjacencyOperator op(path, std::nullopt);
        auto f = NetworkState::constant(SparseVector<Rational>::from_entries({{0, Rational(1)}}));
        auto out = evolve_unit(op, f, Rational(5, 2));
        pass = out.support().size() <= 4 && total_mass(out) == 1;
        return "support " + std::to_string(out.support().size()) + " edges";
    });
}

void resolvent_suite(Recorder& r, std::uint64_t seed) {
    r.run("unit vs general formula, positivity, norm bound", [&](bool& pass) {
        InstanceRng rng(seed + 2);
        double worst = 0.0;
        bool positive = true, bounded = true;
        for (int k = 0; k < 10; ++k) {
            RandomGraphOptions go;
            go.max_edges = 8;
            auto g = random_graph(rng, go);
            auto op = build_adjacency(g);
            RandomStateOptions so;
            so.nonnegative = true;
            auto f = random_state(rng, *g, so);
            VelocityProfile unit;
            for (EdgeId id : g->edge_ids()) unit.set(id, Velocity::exact_value(Rational(1)));
            const double lambda = static_cast<double>(rng.uniform(2, 30)) / 10.0;
            auto a = resolvent_unit(op, {lambda, 0.0}, f);
            auto b = resolvent_general(g, unit, {lambda, 0.0}, f);
            worst = std::max(worst, sample_distance(a.samples, b.samples));
            for (const auto& v : a.samples.samples)
                for (const auto& [id, x] : v) positive = positive && x.real() >= -1e-14;
            bounded = bounded && sup_norm_complex(a.samples) <= to_double(sup_norm(f)) / lambda + 1e-10;
        }
        pass = worst <= 1e-10 && positive && bounded;
        return "max distance " + fmt(worst) + (positive ? "" : ", negative value") + (bounded ? "" : ", norm bound");
    });
    r.run("boundary condition of the resolvent", [&](bool& pass) {
        InstanceRng rng(seed + 3);
        auto g = random_graph(rng);
        auto op = build_adjacency(g);
        auto f = random_state(rng, *g);
        ResolventOptions opts;
        opts.grid = 1024;
        const Complex lambda(1.0, 1.0);
        auto rep = resolvent_identity_check(resolvent_unit(op, lambda, f, opts).samples, f, lambda, op);
        pass = rep.trace_residual <= 1e-8;
        return "trace residual " + fmt(rep.trace_residual);
    });
}

void absorption_suite(Recorder& r, std::uint64_t seed) {
    r.run("zero rate reproduces transport", [&](bool& pass) {
        InstanceRng rng(seed + 4);
        RandomGraphOptions go;
        go.max_edges = 6;
        auto g = random_graph(rng, go);
        auto op = build_adjacency(g);
        auto f = random_state(rng, *g);
        const Rational t = random_time(rng, Rational(2), 4);
        AbsorptionProfile q{RealStepState{}};
        AbsorbingOptions o;
        o.order = 3;
        o.quad_steps = 16;
        auto res = evolve_absorbing(op, q, f, t, o);
        const double d = sup_norm(res.state - convert_state<double>(evolve_unit(op, f, t)));
        pass = d <= 1e-12;
        return "t = " + to_string(t) + ", distance " + fmt(d);
    });
    r.run("constant rate matches e^{q t} T(t) within the reported bound", [&](bool& pass) {
        InstanceRng rng(seed + 5);
        RandomGraphOptions go;
        go.max_edges = 5;
        auto g = random_graph(rng, go);
        auto op = build_adjacency(g);
        auto f = random_state(rng, *g);
        const double q0 = -static_cast<double>(rng.uniform(1, 8)) / 10.0;
        std::vector<std::pair<EdgeId, double>> rate;
        for (EdgeId id : g->edge_ids()) rate.emplace_back(id, q0);
        AbsorptionProfile q{RealStepState::constant(SparseVector<double>::from_entries(rate))};
        AbsorbingOptions o;
        o.order = 6;
        o.quad_steps = 64;
        auto res = evolve_absorbing(op, q, f, Rational(1), o);
        auto exact = sample(convert_state<double>(evolve_unit(op, f, Rational(1))), o.grid);
        double d = 0.0;
        for (std::size_t m = 0; m < exact.samples.size(); ++m)
            d = std::max(d, norm1(res.samples.samples[m] - std::exp(q0) * exact.samples[m]));
        const double bound = res.tail_bound + res.quadrature_bound.value_or(INFINITY);
        pass = d <= bound;
        return "distance " + fmt(d) + " <= bound " + fmt(bound);
    });
}

void approximation_suite(Recorder& r, std::uint64_t seed) {
    r.run("rational velocities are fixed points of convergents", [&](bool& pass) {
        InstanceRng rng(seed + 6);
        int bad = 0;
        for (int k = 0; k < 50; ++k) {
            const Rational c = rng.rational(Rational(1, 4), Rational(4), 30);
            if (continued_fraction_convergent(c, 64) != c) ++bad;
        }
        pass = bad == 0;
        return std::to_string(50 - bad) + "/50 exact";
    });
    r.run("resolvent error falls along convergents", [&](bool& pass) {
        InstanceRng rng(seed + 7);
        RandomGraphOptions go;
        go.max_edges = 5;
        auto g = random_graph(rng, go);
        VelocityProfile vel;
        for (EdgeId id : g->edge_ids())
            vel.set(id, Velocity::real(std::sqrt(static_cast<double>(rng.uniform(2, 7))) /
                                       static_cast<double>(rng.uniform(1, 2))));
        auto f = random_state(rng, *g);
        auto s = make_schedule(*g, vel, {4, 5, 6}, ApproxMethod::ContinuedFraction);
        auto table = resolvent_convergence(g, vel, {1.0, 0.0}, f, s);
        pass = *table.rows.back().resolvent_error <= *table.rows.front().resolvent_error;
        return "first " + fmt(*table.rows.front().resolvent_error) + ", last " +
               fmt(*table.rows.back().resolvent_error);
    });
}

}  // namespace

const std::vector<std::string>& check_suites() {
    static const std::vector<std::string> names{"fixtures", "semigroup", "resolvent", "absorption", "approximation"};
    return names;
}

std::vector<CheckResult> run_checks(const std::string& suite, std::uint64_t seed, const std::string& fixture_dir) {
    const auto& names = check_suites();
    if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end())
        throw ArgumentError("unknown check suite '" + suite + "'");
    std::vector<CheckResult> out;
    for (const auto& name : names) {
        if (suite != "all" && suite != name) continue;
        Recorder r{name, out};
        if (name == "fixtures") fixtures_suite(r, fixture_dir);
        if (name == "semigroup") semigroup_suite(r, seed);
        if (name == "resolvent") resolvent_suite(r, seed);
        if (name == "absorption") absorption_suite(r, seed);
        if (name == "approximation") approximation_suite(r, seed);
    }
    return out;
}

}  // namespace netflow
