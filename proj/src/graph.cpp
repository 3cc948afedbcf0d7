#include "netflow/graph.hpp"

#include "netflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace netflow {

namespace {

std::string edge_name(EdgeId id) { return "edge " + std::to_string(id); }

bool sorted_strict(const Column& c) {
    for (std::size_t k = 1; k < c.size(); ++k)
        if (!(c[k - 1].first < c[k].first)) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricGraph

MetricGraph MetricGraph::finite(std::string name, std::vector<Edge> edges,
                                const std::vector<Weight>& weights) {
    MetricGraph g;
    g.name_ = std::move(name);
    g.finite_ = true;
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (k > 0 && edges[k].id == edges[k - 1].id)
            throw MalformedGraphError("duplicate " + edge_name(edges[k].id));
        g.index_.emplace(edges[k].id, k);
    }
    g.edges_ = std::move(edges);
    g.columns_.assign(g.edges_.size(), {});
    g.rows_.assign(g.edges_.size(), {});

    std::set<std::pair<EdgeId, EdgeId>> seen;
    for (const auto& w : weights) {
        auto ii = g.index_.find(w.i);
        auto jj = g.index_.find(w.j);
        if (ii == g.index_.end() || jj == g.index_.end())
            throw MalformedGraphError("weight (" + std::to_string(w.i) + "," + std::to_string(w.j) +
                                      ") names an unknown edge");
        if (g.edges_[jj->second].head != g.edges_[ii->second].tail)
            throw MalformedGraphError("weight (" + std::to_string(w.i) + "," + std::to_string(w.j) +
                                      "): head of " + edge_name(w.j) + " is not the tail of " +
                                      edge_name(w.i));
        if (sgn(w.w) < 0 || w.w > 1)
            throw MalformedGraphError("weight (" + std::to_string(w.i) + "," + std::to_string(w.j) +
                                      ") outside [0,1]");
        if (!seen.emplace(w.i, w.j).second)
            throw MalformedGraphError("duplicate weight (" + std::to_string(w.i) + "," +
                                      std::to_string(w.j) + ")");
        if (sgn(w.w) == 0) continue;
        g.columns_[jj->second].emplace_back(w.i, w.w);
        g.rows_[ii->second].emplace_back(w.j, w.w);
    }
    for (auto& c : g.columns_) std::sort(c.begin(), c.end());
    for (auto& r : g.rows_) std::sort(r.begin(), r.end());
    return g;
}

MetricGraph MetricGraph::lazy(std::string name, ColumnFn column, EndpointFn endpoints) {
    if (!column || !endpoints) throw ArgumentError("lazy graph needs both callbacks");
    MetricGraph g;
    g.name_ = std::move(name);
    g.finite_ = false;
    g.lazy_column_ = std::move(column);
    g.lazy_endpoints_ = std::move(endpoints);
    return g;
}

const std::vector<Edge>& MetricGraph::edges() const {
    if (!finite_) throw ArgumentError("edge list requested from lazy graph '" + name_ + "'");
    return edges_;
}

std::vector<EdgeId> MetricGraph::edge_ids() const {
    std::vector<EdgeId> ids;
    ids.reserve(edges().size());
    for (const auto& e : edges_) ids.push_back(e.id);
    return ids;
}

std::optional<std::size_t> MetricGraph::index_of(EdgeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const Column& MetricGraph::row(EdgeId i) const {
    if (!finite_) throw ArgumentError("row access on lazy graph '" + name_ + "'");
    auto k = index_of(i);
    if (!k) throw MalformedGraphError("unknown " + edge_name(i));
    return rows_[*k];
}

bool MetricGraph::has_edge(EdgeId id) const { return !finite_ || index_.count(id) > 0; }

Edge MetricGraph::endpoints(EdgeId id) const {
    if (!finite_) {
        Edge e = lazy_endpoints_(id);
        e.id = id;
        return e;
    }
    auto k = index_of(id);
    if (!k) throw MalformedGraphError("unknown " + edge_name(id));
    return edges_[*k];
}

Column MetricGraph::column(EdgeId j) const {
    if (finite_) {
        auto k = index_of(j);
        if (!k) throw MalformedGraphError("unknown " + edge_name(j));
        return columns_[*k];
    }
    Column c = lazy_column_(j);
    if (c.size() > kMaxLazyColumn)
        throw MalformedGraphError("lazy column of " + edge_name(j) + " exceeds " +
                                  std::to_string(kMaxLazyColumn) + " entries");
    if (!sorted_strict(c))
        throw MalformedGraphError("lazy column of " + edge_name(j) + " is not strictly sorted");
    std::erase_if(c, [](const auto& e) { return sgn(e.second) == 0; });
    return c;
}

// ---------------------------------------------------------------------------
// Velocities

Velocity Velocity::exact_value(const Rational& q) {
    if (sgn(q) <= 0) throw DomainError("velocity must be positive, got " + to_string(q));
    Velocity v;
    v.exact = q;
    v.value = q.get_d();
    return v;
}

Velocity Velocity::real(double x) {
    if (!(x > 0) || !std::isfinite(x))
        throw DomainError("velocity must be positive and finite");
    Velocity v;
    v.value = x;
    return v;
}

VelocityProfile VelocityProfile::uniform(const Velocity& v) {
    VelocityProfile p;
    p.uniform_ = v;
    return p;
}

void VelocityProfile::set(EdgeId id, const Velocity& v) {
    if (!(v.value > 0) || !std::isfinite(v.value))
        throw DomainError("velocity of " + edge_name(id) + " must be positive and finite");
    c_[id] = v;
}

bool VelocityProfile::has(EdgeId id) const { return uniform_.has_value() || c_.count(id) > 0; }

const Velocity& VelocityProfile::at(EdgeId id) const {
    auto it = c_.find(id);
    if (it != c_.end()) return it->second;
    if (uniform_) return *uniform_;
    throw MissingVelocityError("no velocity for " + edge_name(id));
}

double VelocityProfile::c_min() const {
    double m = uniform_ ? uniform_->value : INFINITY;
    for (const auto& [id, v] : c_) m = std::min(m, v.value);
    return m;
}

double VelocityProfile::c_max() const {
    double m = uniform_ ? uniform_->value : 0.0;
    for (const auto& [id, v] : c_) m = std::max(m, v.value);
    return m;
}

bool VelocityProfile::all_exact() const {
    if (uniform_ && !uniform_->is_exact()) return false;
    return std::all_of(c_.begin(), c_.end(), [](const auto& kv) { return kv.second.is_exact(); });
}

bool VelocityProfile::is_unit() const {
    auto unit = [](const Velocity& v) { return v.exact && *v.exact == 1; };
    if (uniform_ && !unit(*uniform_)) return false;
    return std::all_of(c_.begin(), c_.end(), [&](const auto& kv) { return unit(kv.second); });
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const {
    return loops.empty() && duplicate_edges.empty() && sinks.empty() && malformed.empty() &&
           std::all_of(columns.begin(), columns.end(), [](const ColumnCheck& c) { return c.pass; });
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    const auto failing = std::count_if(columns.begin(), columns.end(),
                                       [](const ColumnCheck& c) { return !c.pass; });
    os << columns.size() << " columns, ";
    if (failing == 0)
        os << "all sum 1";
    else
        os << failing << " not summing to 1";
    if (!loops.empty()) os << "; " << loops.size() << " loops";
    if (!duplicate_edges.empty()) os << "; " << duplicate_edges.size() << " duplicate edges";
    if (!sinks.empty()) os << "; " << sinks.size() << " sinks";
    if (!malformed.empty()) os << "; " << malformed.size() << " malformed columns";
    return os.str();
}

ValidationReport validate_graph(const MetricGraph& g, const std::vector<EdgeId>& probe_in) {
    ValidationReport rep;
    std::vector<EdgeId> probe = probe_in;
    if (probe.empty() && g.is_finite()) probe = g.edge_ids();
    std::sort(probe.begin(), probe.end());
    probe.erase(std::unique(probe.begin(), probe.end()), probe.end());

    std::map<std::pair<VertexId, VertexId>, EdgeId> pairs;
    std::set<VertexId> tails;
    if (g.is_finite())
        for (const auto& e : g.edges()) tails.insert(e.tail);

    std::set<VertexId> sinks;
    for (EdgeId j : probe) {
        Edge e;
        try {
            e = g.endpoints(j);
        } catch (const Error& err) {
            rep.malformed.push_back(err.what());
            continue;
        }
        if (e.tail == e.head) rep.loops.push_back(j);
        auto [it, fresh] = pairs.emplace(std::make_pair(e.tail, e.head), j);
        if (!fresh) rep.duplicate_edges.emplace_back(it->second, j);

        Column col;
        try {
            col = g.column(j);
        } catch (const Error& err) {
            rep.malformed.push_back(err.what());
            continue;
        }
        ColumnCheck check{j, Rational(0), false};
        for (const auto& [i, w] : col) check.sum += w;
        check.pass = check.sum == 1;
        rep.columns.push_back(check);

        const bool head_has_exit = g.is_finite() ? tails.count(e.head) > 0 : !col.empty();
        if (!head_has_exit) sinks.insert(e.head);
        if (!g.is_finite()) {
            for (const auto& [i, w] : col) {
                Edge out = g.endpoints(i);
                if (out.tail != e.head)
                    rep.malformed.push_back("lazy column of " + edge_name(j) + " names " +
                                            edge_name(i) + " which does not leave its head");
            }
        }
    }
    rep.sinks.assign(sinks.begin(), sinks.end());
    return rep;
}

// ---------------------------------------------------------------------------
// AdjacencyOperator

AdjacencyOperator::AdjacencyOperator(std::shared_ptr<const MetricGraph> graph,
                                     std::optional<VelocityProfile> scaling)
    : graph_(std::move(graph)), scaling_(std::move(scaling)) {
    if (!graph_) throw ArgumentError("adjacency operator needs a graph");
}

AdjacencyOperator::AdjacencyOperator(const AdjacencyOperator& other)
    : graph_(other.graph_), scaling_(other.scaling_) {}

AdjacencyOperator& AdjacencyOperator::operator=(const AdjacencyOperator& other) {
    if (this != &other) {
        std::scoped_lock lock(mutex_);
        graph_ = other.graph_;
        scaling_ = other.scaling_;
        raw_.clear();
        cache_.clear();
        csr_.reset();
    }
    return *this;
}

// Caller holds mutex_.
const Column& AdjacencyOperator::raw_column(EdgeId j) const {
    auto it = raw_.find(j);
    if (it != raw_.end()) return it->second;
    Column c = graph_->column(j);
    if (!graph_->is_finite()) {
        // Lazy graphs are validated one column at a time.
        Edge e = graph_->endpoints(j);
        if (e.tail == e.head) throw MalformedGraphError("loop at " + edge_name(j));
        if (c.empty())
            throw MalformedGraphError("head of " + edge_name(j) + " is a sink (empty column)");
        Rational total(0);
        for (const auto& [i, w] : c) {
            if (sgn(w) < 0 || w > 1)
                throw MalformedGraphError("lazy weight outside [0,1] in column of " + edge_name(j));
            if (graph_->endpoints(i).tail != e.head)
                throw MalformedGraphError("lazy column of " + edge_name(j) + " names " +
                                          edge_name(i) + " which does not leave its head");
            total += w;
        }
        if (total != 1)
            throw MalformedGraphError("column of " + edge_name(j) + " sums to " + to_string(total));
    }
    return raw_.emplace(j, std::move(c)).first->second;
}

const Column& AdjacencyOperator::column(EdgeId j) const {
    std::scoped_lock lock(mutex_);
    auto& slot = cache_[j];
    if (slot.exact) return *slot.exact;
    const Column& raw = raw_column(j);
    if (!scaling_) {
        slot.exact = raw;
        return *slot.exact;
    }
    const Velocity& cj = scaling_->at(j);
    if (!cj.exact)
        throw PrecisionError("velocity of " + edge_name(j) + " is not rational; no exact column");
    Column out;
    out.reserve(raw.size());
    for (const auto& [i, w] : raw) {
        const Velocity& ci = scaling_->at(i);
        if (!ci.exact)
            throw PrecisionError("velocity of " + edge_name(i) + " is not rational; no exact column");
        Rational entry = w * *cj.exact / *ci.exact;
        out.emplace_back(i, entry);
    }
    slot.exact = std::move(out);
    return *slot.exact;
}

const AdjacencyOperator::RealColumn& AdjacencyOperator::column_real(EdgeId j) const {
    std::scoped_lock lock(mutex_);
    auto& slot = cache_[j];
    if (slot.real) return *slot.real;
    const Column& raw = raw_column(j);
    RealColumn out;
    out.reserve(raw.size());
    if (!scaling_) {
        for (const auto& [i, w] : raw) out.emplace_back(i, w.get_d());
    } else {
        const Velocity& cj = scaling_->at(j);
        for (const auto& [i, w] : raw) {
            const Velocity& ci = scaling_->at(i);
            double entry = (cj.exact && ci.exact) ? Rational(w * *cj.exact / *ci.exact).get_d()
                                                  : w.get_d() * cj.value / ci.value;
            out.emplace_back(i, entry);
        }
    }
    slot.real = std::move(out);
    return *slot.real;
}

template <class T>
SparseVector<T> AdjacencyOperator::apply(const SparseVector<T>& v) const {
    std::vector<std::pair<EdgeId, T>> terms;
    terms.reserve(v.size() * 2);
    for (const auto& [j, x] : v) {
        if constexpr (std::is_same_v<T, Rational>) {
            for (const auto& [i, w] : column(j)) {
                if (w == 1)
                    terms.emplace_back(i, x);
                else
                    terms.emplace_back(i, Rational(w * x));
            }
        } else {
            for (const auto& [i, w] : column_real(j)) terms.emplace_back(i, T(w) * x);
        }
    }
    return SparseVector<T>::from_entries(std::move(terms));
}

const AdjacencyOperator::Csr& AdjacencyOperator::csr() const {
    {
        std::scoped_lock lock(mutex_);
        if (csr_) return *csr_;
    }
    auto m = std::make_shared<Csr>();
    m->ids = graph_->edge_ids();
    for (std::size_t k = 0; k < m->ids.size(); ++k) m->index[m->ids[k]] = k;
    m->start.push_back(0);
    for (EdgeId j : m->ids) {
        for (const auto& [i, w] : column_real(j)) {
            m->row.push_back(m->index.at(i));
            m->value.push_back(w);
        }
        m->start.push_back(m->row.size());
    }
    std::scoped_lock lock(mutex_);
    if (!csr_) csr_ = std::move(m);
    return *csr_;
}

template <class T>
SparseVector<T> AdjacencyOperator::apply_power(const SparseVector<T>& v, std::int64_t n) const {
    if (n < 0) throw ArgumentError("negative operator power");
    if constexpr (std::is_same_v<T, Rational>) {
        SparseVector<T> out = v;
        for (std::int64_t k = 0; k < n && !out.empty(); ++k) out = apply(out);
        return out;
    } else {
        if (n < 2 || !graph_->is_finite() || v.empty()) {
            SparseVector<T> out = v;
            for (std::int64_t k = 0; k < n && !out.empty(); ++k) out = apply(out);
            return out;
        }
        const Csr& m = csr();
        const std::size_t size = m.ids.size();
        std::vector<T> cur(size, T(0)), next(size, T(0));
        std::vector<char> live(size, 0), next_live(size, 0);
        for (const auto& [j, x] : v) {
            auto it = m.index.find(j);
            if (it == m.index.end()) throw ArgumentError("vector has edge " + std::to_string(j) + " unknown to the graph");
            cur[it->second] = x;
            live[it->second] = 1;
        }
        for (std::int64_t k = 0; k < n; ++k) {
            std::fill(next.begin(), next.end(), T(0));
            std::fill(next_live.begin(), next_live.end(), 0);
            for (std::size_t c = 0; c < size; ++c) {
                if (!live[c]) continue;
                const T x = cur[c];
                for (std::size_t p = m.start[c]; p < m.start[c + 1]; ++p) {
                    next[m.row[p]] += m.value[p] * x;
                    next_live[m.row[p]] = 1;
                }
            }
            cur.swap(next);
            live.swap(next_live);
        }
        std::vector<std::pair<EdgeId, T>> entries;
        for (std::size_t c = 0; c < size; ++c)
            if (live[c]) entries.emplace_back(m.ids[c], cur[c]);
        return SparseVector<T>::from_entries(std::move(entries));
    }
}

template SparseVector<Rational> AdjacencyOperator::apply_power(const SparseVector<Rational>&, std::int64_t) const;
template SparseVector<double> AdjacencyOperator::apply_power(const SparseVector<double>&, std::int64_t) const;
template SparseVector<std::complex<double>> AdjacencyOperator::apply_power(const SparseVector<std::complex<double>>&,
                                                                           std::int64_t) const;

template SparseVector<Rational> AdjacencyOperator::apply(const SparseVector<Rational>&) const;
template SparseVector<double> AdjacencyOperator::apply(const SparseVector<double>&) const;
template SparseVector<std::complex<double>> AdjacencyOperator::apply(
    const SparseVector<std::complex<double>>&) const;

AdjacencyOperator build_adjacency(std::shared_ptr<const MetricGraph> g,
                                  std::optional<VelocityProfile> scaling) {
    if (!g) throw ArgumentError("null graph");
    if (g->is_finite()) {
        ValidationReport rep = validate_graph(*g);
        if (!rep.ok())
            throw MalformedGraphError("graph '" + g->name() + "' failed validation: " + rep.summary());
        if (scaling)
            for (const auto& e : g->edges())
                if (!scaling->has(e.id))
                    throw MissingVelocityError("no velocity for " + edge_name(e.id));
    }
    return AdjacencyOperator(std::move(g), std::move(scaling));
}

double column_norm(const AdjacencyOperator& op, const std::vector<EdgeId>& columns) {
    double best = 0.0;
    for (EdgeId j : columns) {
        double s = 0.0;
        for (const auto& [i, w] : op.column_real(j)) s += std::abs(w);
        best = std::max(best, s);
    }
    return best;
}

}  // namespace netflow
