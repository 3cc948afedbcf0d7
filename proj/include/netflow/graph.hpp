#pragma once

#include "netflow/rational.hpp"
#include "netflow/sparse_vector.hpp"

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace netflow {

using VertexId = std::string;

/// Edges are parametrized on [0,1] against their direction: tail at 1, head at 0.
struct Edge {
    EdgeId id = 0;
    VertexId tail;
    VertexId head;
};

/// w_ij: share of what leaves edge j at its head that enters edge i at its tail.
struct Weight {
    EdgeId i = 0;
    EdgeId j = 0;
    Rational w;
};

/// Column j of the line-graph adjacency matrix, sorted by row id.
using Column = std::vector<std::pair<EdgeId, Rational>>;

/// Longest column accepted from a lazy callback before it is treated as infinite.
inline constexpr std::size_t kMaxLazyColumn = std::size_t{1} << 16;

class MetricGraph {
public:
    using ColumnFn = std::function<Column(EdgeId)>;
    using EndpointFn = std::function<Edge(EdgeId)>;

    /// Throws MalformedGraphError on duplicate edge ids, weights that name unknown
    /// edges or non-adjacent pairs, and weights outside [0,1]. Loops, parallel
    /// edges, sinks and column sums are left for validate_graph to report.
    static MetricGraph finite(std::string name, std::vector<Edge> edges,
                              const std::vector<Weight>& weights);

    static MetricGraph lazy(std::string name, ColumnFn column, EndpointFn endpoints);

    const std::string& name() const { return name_; }
    bool is_finite() const { return finite_; }

    /// Finite graphs only.
    const std::vector<Edge>& edges() const;
    std::vector<EdgeId> edge_ids() const;
    std::optional<std::size_t> index_of(EdgeId id) const;
    /// Row i of the adjacency matrix: pairs (j, w_ij). Finite graphs only.
    const Column& row(EdgeId i) const;

    bool has_edge(EdgeId id) const;
    Edge endpoints(EdgeId id) const;

    /// Raw column as supplied. For lazy graphs the callback result is checked
    /// for ordering and finiteness.
    Column column(EdgeId j) const;

private:
    MetricGraph() = default;

    std::string name_;
    bool finite_ = true;
    std::vector<Edge> edges_;
    std::unordered_map<EdgeId, std::size_t> index_;
    std::vector<Column> columns_;
    std::vector<Column> rows_;
    ColumnFn lazy_column_;
    EndpointFn lazy_endpoints_;
};

struct Velocity {
    double value = 1.0;
    std::optional<Rational> exact;

    static Velocity exact_value(const Rational& q);
    static Velocity real(double x);
    bool is_exact() const { return exact.has_value(); }
};

/// Edge velocities with 0 < c_min <= c_j <= c_max. A uniform fallback covers
/// edges of lazy graphs that are not listed explicitly.
class VelocityProfile {
public:
    VelocityProfile() = default;
    static VelocityProfile uniform(const Velocity& v);

    void set(EdgeId id, const Velocity& v);
    bool has(EdgeId id) const;
    const Velocity& at(EdgeId id) const;
    const std::map<EdgeId, Velocity>& entries() const { return c_; }
    const std::optional<Velocity>& fallback() const { return uniform_; }

    double c_min() const;
    double c_max() const;
    bool all_exact() const;
    /// Every stored velocity is exactly 1.
    bool is_unit() const;

private:
    std::map<EdgeId, Velocity> c_;
    std::optional<Velocity> uniform_;
};

struct ColumnCheck {
    EdgeId edge = 0;
    Rational sum;
    bool pass = false;
};

struct ValidationReport {
    std::vector<ColumnCheck> columns;
    std::vector<EdgeId> loops;
    std::vector<std::pair<EdgeId, EdgeId>> duplicate_edges;
    std::vector<VertexId> sinks;
    std::vector<std::string> malformed;

    bool ok() const;
    std::string summary() const;
};

/// Checks column stochasticity and structure on `probe` (all edges of a finite
/// graph when empty). Lazy callback defects are reported under `malformed`.
ValidationReport validate_graph(const MetricGraph& g, const std::vector<EdgeId>& probe = {});

/// The line-graph adjacency operator B, or B^C = C^{-1} B C when scaled:
/// entry (i,j) is (c_j / c_i) w_ij. Columns are materialized on first access and
/// cached; lazy columns are validated at that point. Safe for concurrent readers.
class AdjacencyOperator {
public:
    using RealColumn = std::vector<std::pair<EdgeId, double>>;

    AdjacencyOperator(std::shared_ptr<const MetricGraph> graph,
                      std::optional<VelocityProfile> scaling);
    AdjacencyOperator(const AdjacencyOperator& other);
    AdjacencyOperator& operator=(const AdjacencyOperator& other);

    const MetricGraph& graph() const { return *graph_; }
    std::shared_ptr<const MetricGraph> graph_ptr() const { return graph_; }
    bool scaled() const { return scaling_.has_value(); }
    const std::optional<VelocityProfile>& scaling() const { return scaling_; }

    /// Exact column; PrecisionError when a velocity involved is not rational.
    const Column& column(EdgeId j) const;
    const RealColumn& column_real(EdgeId j) const;

    template <class T>
    SparseVector<T> apply(const SparseVector<T>& v) const;

    /// B^n v. Floating vectors on finite graphs go through a dense CSR copy of
    /// the operator built on first use.
    template <class T>
    SparseVector<T> apply_power(const SparseVector<T>& v, std::int64_t n) const;

private:
    struct Csr {
        std::vector<EdgeId> ids;
        std::unordered_map<EdgeId, std::size_t> index;
        std::vector<std::size_t> start;
        std::vector<std::size_t> row;
        std::vector<double> value;
    };
    const Csr& csr() const;
    mutable std::shared_ptr<const Csr> csr_;

    struct Cached {
        std::optional<Column> exact;
        std::optional<RealColumn> real;
    };
    const Column& raw_column(EdgeId j) const;

    std::shared_ptr<const MetricGraph> graph_;
    std::optional<VelocityProfile> scaling_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<EdgeId, Column> raw_;
    mutable std::unordered_map<EdgeId, Cached> cache_;
};

/// Validates the finite graph (or defers to first column access on lazy ones)
/// and checks that `scaling` covers every edge.
AdjacencyOperator build_adjacency(std::shared_ptr<const MetricGraph> g,
                                  std::optional<VelocityProfile> scaling = std::nullopt);

template <class T>
SparseVector<T> apply_adjacency(const AdjacencyOperator& op, const SparseVector<T>& v) {
    return op.apply(v);
}

/// Max column sum of |entries| (the l1-induced norm) over the given columns.
double column_norm(const AdjacencyOperator& op, const std::vector<EdgeId>& columns);

extern template SparseVector<Rational> AdjacencyOperator::apply(const SparseVector<Rational>&) const;
extern template SparseVector<double> AdjacencyOperator::apply(const SparseVector<double>&) const;
extern template SparseVector<std::complex<double>> AdjacencyOperator::apply(
    const SparseVector<std::complex<double>>&) const;
extern template SparseVector<Rational> AdjacencyOperator::apply_power(const SparseVector<Rational>&,
                                                                      std::int64_t) const;
extern template SparseVector<double> AdjacencyOperator::apply_power(const SparseVector<double>&, std::int64_t) const;
extern template SparseVector<std::complex<double>> AdjacencyOperator::apply_power(
    const SparseVector<std::complex<double>>&, std::int64_t) const;

}  // namespace netflow
