#include "netflow/io.hpp"

#include "netflow/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace netflow {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        if (tok[0] == '#') break;
        out.push_back(tok);
    }
    return out;
}

EdgeId parse_edge_id(const std::string& tok, const std::string& source, int line) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(source, line, "bad edge id '" + tok + "'");
    }
}

Rational parse_exact_at(const std::string& tok, const std::string& source, int line) {
    try {
        return parse_rational(tok);
    } catch (const Error& e) {
        throw ParseError(source, line, e.what());
    }
}

double parse_real_at(const std::string& tok, const std::string& source, int line) {
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        // p/q literals are also valid reals
        try {
            return parse_rational(tok).get_d();
        } catch (const Error&) {
            throw ParseError(source, line, "bad number '" + tok + "'");
        }
    }
}

Velocity parse_velocity(const std::string& tok, const std::string& source, int line) {
    try {
        if (tok.rfind("sqrt(", 0) == 0 && tok.back() == ')') {
            Rational inner = parse_rational(tok.substr(5, tok.size() - 6));
            if (sgn(inner) <= 0) throw ParseError(source, line, "sqrt of non-positive value");
            // perfect squares stay exact
            Integer rn, rd;
            mpz_sqrt(rn.get_mpz_t(), inner.get_num_mpz_t());
            mpz_sqrt(rd.get_mpz_t(), inner.get_den_mpz_t());
            if (rn * rn == inner.get_num() && rd * rd == inner.get_den())
                return Velocity::exact_value(ratio(rn, rd));
            return Velocity::real(std::sqrt(inner.get_d()));
        }
        if (tok.find_first_of(".eE") != std::string::npos)
            return Velocity::real(parse_real_at(tok, source, line));
        return Velocity::exact_value(parse_rational(tok));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(source, line, e.what());
    }
}

}  // namespace

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Graph files

GraphFile parse_graph(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string name;
    bool have_header = false;
    std::vector<Edge> edges;
    std::map<EdgeId, int> edge_line;
    std::vector<std::pair<Weight, int>> weights;
    std::set<std::pair<EdgeId, EdgeId>> weight_keys;
    std::optional<VelocityProfile> vel;

    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokenize(line);
        if (tok.empty()) continue;
        const std::string& kw = tok[0];
        if (kw == "graph") {
            if (have_header) throw ParseError(source, lineno, "second 'graph' header");
            if (tok.size() != 2) throw ParseError(source, lineno, "expected 'graph <name>'");
            name = tok[1];
            have_header = true;
            continue;
        }
        if (!have_header) throw ParseError(source, lineno, "missing 'graph <name>' header");
        if (kw == "edge") {
            if (tok.size() != 4) throw ParseError(source, lineno, "expected 'edge <id> <tail> <head>'");
            EdgeId id = parse_edge_id(tok[1], source, lineno);
            if (edge_line.count(id))
                throw ParseError(source, lineno,
                                 "duplicate edge id " + tok[1] + " (first on line " +
                                     std::to_string(edge_line[id]) + ")");
            edge_line[id] = lineno;
            edges.push_back(Edge{id, tok[2], tok[3]});
        } else if (kw == "w") {
            if (tok.size() != 4) throw ParseError(source, lineno, "expected 'w <i> <j> <p>/<q>'");
            Weight w{parse_edge_id(tok[1], source, lineno), parse_edge_id(tok[2], source, lineno),
                     parse_exact_at(tok[3], source, lineno)};
            if (!weight_keys.emplace(w.i, w.j).second)
                throw ParseError(source, lineno, "duplicate weight for pair (" + tok[1] + "," + tok[2] + ")");
            weights.emplace_back(w, lineno);
        } else if (kw == "c") {
            if (tok.size() != 3) throw ParseError(source, lineno, "expected 'c <id> <value>'");
            EdgeId id = parse_edge_id(tok[1], source, lineno);
            if (!vel) vel.emplace();
            if (vel->entries().count(id))
                throw ParseError(source, lineno, "duplicate velocity for edge " + tok[1]);
            vel->set(id, parse_velocity(tok[2], source, lineno));
        } else {
            throw ParseError(source, lineno, "unknown keyword '" + kw + "'");
        }
    }
    if (!have_header) throw ParseError(source, 0, "empty graph file");

    std::map<EdgeId, const Edge*> by_id;
    for (const auto& e : edges) by_id[e.id] = &e;
    std::vector<Weight> plain;
    for (const auto& [w, ln] : weights) {
        auto ii = by_id.find(w.i);
        auto jj = by_id.find(w.j);
        if (ii == by_id.end() || jj == by_id.end())
            throw ParseError(source, ln, "weight names an unknown edge");
        if (jj->second->head != ii->second->tail)
            throw ParseError(source, ln,
                             "non-adjacent weight pair: head of edge " + std::to_string(w.j) +
                                 " is not the tail of edge " + std::to_string(w.i));
        if (sgn(w.w) < 0 || w.w > 1) throw ParseError(source, ln, "weight outside [0,1]");
        plain.push_back(w);
    }
    if (vel)
        for (const auto& [id, v] : vel->entries())
            if (!by_id.count(id))
                throw ParseError(source, 0, "velocity given for unknown edge " + std::to_string(id));

    GraphFile out;
    out.graph = std::make_shared<const MetricGraph>(MetricGraph::finite(name, edges, plain));
    out.velocities = std::move(vel);
    return out;
}

GraphFile read_graph_file(const std::string& path) { return parse_graph(read_text_file(path), path); }

std::string format_graph(const MetricGraph& g, const std::optional<VelocityProfile>& vel) {
    std::ostringstream os;
    os << "graph " << g.name() << "\n";
    for (const auto& e : g.edges()) os << "edge " << e.id << " " << e.tail << " " << e.head << "\n";
    for (const auto& e : g.edges())
        for (const auto& [i, w] : g.column(e.id)) os << "w " << i << " " << e.id << " " << to_string(w) << "\n";
    if (vel)
        for (const auto& [id, v] : vel->entries())
            os << "c " << id << " " << (v.exact ? to_string(*v.exact) : format_real(v.value)) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// State files

StepFile parse_step_file(const std::string& text, const std::string& source) {
    StepFile f;
    f.source = source;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_bp = false;
    std::set<std::pair<std::size_t, EdgeId>> keys;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokenize(line);
        if (tok.empty()) continue;
        const std::string& kw = tok[0];
        if (kw == "state" || kw == "testfn" || kw == "absorption") {
            if (!f.kind.empty()) throw ParseError(source, lineno, "second header");
            if (tok.size() != 2) throw ParseError(source, lineno, "expected '" + kw + " <name>'");
            f.kind = kw;
            f.name = tok[1];
            continue;
        }
        if (f.kind.empty()) throw ParseError(source, lineno, "missing 'state <name>' header");
        if (kw == "bp") {
            if (have_bp) throw ParseError(source, lineno, "second 'bp' line");
            for (std::size_t k = 1; k < tok.size(); ++k) f.breakpoints.push_back(parse_exact_at(tok[k], source, lineno));
            if (f.breakpoints.size() < 2 || f.breakpoints.front() != 0 || f.breakpoints.back() != 1)
                throw ParseError(source, lineno, "breakpoints must start at 0 and end at 1");
            for (std::size_t k = 1; k < f.breakpoints.size(); ++k)
                if (!(f.breakpoints[k - 1] < f.breakpoints[k]))
                    throw ParseError(source, lineno, "breakpoints must be strictly increasing");
            have_bp = true;
        } else if (kw == "v") {
            if (!have_bp) throw ParseError(source, lineno, "'v' before 'bp'");
            if (tok.size() != 4) throw ParseError(source, lineno, "expected 'v <piece> <edge> <value>'");
            std::size_t piece = 0;
            try {
                std::size_t used = 0;
                long long p = std::stoll(tok[1], &used);
                if (used != tok[1].size() || p < 0) throw std::invalid_argument(tok[1]);
                piece = static_cast<std::size_t>(p);
            } catch (const std::exception&) {
                throw ParseError(source, lineno, "bad piece index '" + tok[1] + "'");
            }
            if (piece + 1 >= f.breakpoints.size())
                throw ParseError(source, lineno, "piece index " + tok[1] + " out of range");
            EdgeId edge = parse_edge_id(tok[2], source, lineno);
            if (!keys.emplace(piece, edge).second)
                throw ParseError(source, lineno, "duplicate value for piece " + tok[1] + ", edge " + tok[2]);
            f.entries.push_back({piece, edge, tok[3], lineno});
        } else {
            throw ParseError(source, lineno, "unknown keyword '" + kw + "'");
        }
    }
    if (f.kind.empty()) throw ParseError(source, 0, "empty state file");
    if (!have_bp) f.breakpoints = {Rational(0), Rational(1)};
    return f;
}

NetworkState to_network_state(const StepFile& file) {
    std::vector<std::vector<std::pair<EdgeId, Rational>>> vals(file.breakpoints.size() - 1);
    for (const auto& e : file.entries)
        vals[e.piece].emplace_back(e.edge, parse_exact_at(e.value, file.source, e.line));
    std::vector<SparseVector<Rational>> pieces;
    for (auto& v : vals) pieces.push_back(SparseVector<Rational>::from_entries(std::move(v)));
    return NetworkState(file.breakpoints, std::move(pieces));
}

RealStepState to_real_state(const StepFile& file) {
    std::vector<std::vector<std::pair<EdgeId, double>>> vals(file.breakpoints.size() - 1);
    for (const auto& e : file.entries)
        vals[e.piece].emplace_back(e.edge, parse_real_at(e.value, file.source, e.line));
    std::vector<SparseVector<double>> pieces;
    for (auto& v : vals) pieces.push_back(SparseVector<double>::from_entries(std::move(v)));
    return RealStepState(file.breakpoints, std::move(pieces));
}

NetworkState read_state_file(const std::string& path) {
    return to_network_state(parse_step_file(read_text_file(path), path));
}

RealStepState read_real_state_file(const std::string& path) {
    return to_real_state(parse_step_file(read_text_file(path), path));
}

std::string format_state(const NetworkState& f, const std::string& name, const std::string& kind) {
    std::ostringstream os;
    os << kind << " " << name << "\nbp";
    for (const auto& b : f.breakpoints()) os << " " << to_string(b);
    os << "\n";
    for (std::size_t k = 0; k < f.pieces(); ++k)
        for (const auto& [id, x] : f.values()[k]) os << "v " << k << " " << id << " " << to_string(x) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// CSV

std::string format_csv(const SampledState<double>& f) {
    const auto ids = f.support();
    std::ostringstream os;
    os << "s";
    for (EdgeId id : ids) os << ",edge_" << id;
    os << "\n";
    if (ids.empty()) return os.str();
    for (int m = 0; m <= f.grid; ++m) {
        os << format_real(f.point(m));
        for (EdgeId id : ids) os << "," << format_real(f.samples[m].at(id));
        os << "\n";
    }
    return os.str();
}

std::string format_csv(const SampledState<std::complex<double>>& f) {
    bool real = true;
    for (const auto& v : f.samples)
        for (const auto& [id, z] : v)
            if (z.imag() != 0.0) real = false;
    if (real) {
        SampledState<double> r;
        r.grid = f.grid;
        for (const auto& v : f.samples)
            r.samples.push_back(v.transform<double>([](const std::complex<double>& z) { return z.real(); }));
        return format_csv(r);
    }
    const auto ids = f.support();
    std::ostringstream os;
    os << "s";
    for (EdgeId id : ids) os << ",edge_" << id << "_re,edge_" << id << "_im";
    os << "\n";
    for (int m = 0; m <= f.grid; ++m) {
        os << format_real(f.point(m));
        for (EdgeId id : ids) {
            auto z = f.samples[m].at(id);
            os << "," << format_real(z.real()) << "," << format_real(z.imag());
        }
        os << "\n";
    }
    return os.str();
}

SampledState<double> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("<csv>", 1, "missing header");
    std::vector<EdgeId> ids;
    {
        std::istringstream hs(line);
        std::string col;
        std::getline(hs, col, ',');
        if (col != "s") throw ParseError("<csv>", 1, "first column must be 's'");
        while (std::getline(hs, col, ',')) {
            if (col.rfind("edge_", 0) != 0) throw ParseError("<csv>", 1, "bad column '" + col + "'");
            ids.push_back(parse_edge_id(col.substr(5), "<csv>", 1));
        }
    }
    SampledState<double> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::string cell;
        std::getline(rs, cell, ',');
        std::vector<std::pair<EdgeId, double>> entries;
        for (EdgeId id : ids) {
            if (!std::getline(rs, cell, ',')) throw ParseError("<csv>", lineno, "short row");
            entries.emplace_back(id, parse_real_at(cell, "<csv>", lineno));
        }
        out.samples.push_back(SparseVector<double>::from_entries(std::move(entries)));
    }
    if (out.samples.empty()) {
        out.grid = 1;
        out.samples.assign(2, {});
    } else {
        if (out.samples.size() < 2) throw ParseError("<csv>", lineno, "need at least two sample rows");
        out.grid = static_cast<int>(out.samples.size()) - 1;
    }
    return out;
}

void emit_plotdata(const SampledState<double>& f, const std::string& path) { write_text_file(path, format_csv(f)); }

void emit_plotdata(const SampledState<std::complex<double>>& f, const std::string& path) {
    write_text_file(path, format_csv(f));
}

}  // namespace netflow
