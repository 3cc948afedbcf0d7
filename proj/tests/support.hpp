#pragma once

#include "netflow/graph.hpp"
#include "netflow/io.hpp"
#include "netflow/state.hpp"

#include <memory>
#include <string>

namespace testing_support {

using namespace netflow;

inline std::string fixture(const std::string& name) { return std::string(NETFLOW_FIXTURE_DIR) + "/" + name; }

inline std::shared_ptr<const MetricGraph> load_graph(const std::string& name) {
    return read_graph_file(fixture(name)).graph;
}

inline Rational q(const char* s) { return parse_rational(s); }

inline SparseVector<Rational> vec(std::initializer_list<std::pair<EdgeId, const char*>> entries) {
    std::vector<std::pair<EdgeId, Rational>> out;
    for (const auto& [id, v] : entries) out.emplace_back(id, parse_rational(v));
    return SparseVector<Rational>::from_entries(std::move(out));
}

/// Bi-infinite path: edge k runs from vertex k to vertex k+1 and feeds edge k+1.
inline std::shared_ptr<const MetricGraph> bi_infinite_path() {
    return std::make_shared<const MetricGraph>(MetricGraph::lazy(
        "path",
        [](EdgeId j) { return Column{{j + 1, Rational(1)}}; },
        [](EdgeId j) { return Edge{j, "u" + std::to_string(j), "u" + std::to_string(j + 1)}; }));
}

inline VelocityProfile exact_velocities(std::initializer_list<std::pair<EdgeId, const char*>> entries) {
    VelocityProfile vel;
    for (const auto& [id, v] : entries) vel.set(id, Velocity::exact_value(parse_rational(v)));
    return vel;
}

}  // namespace testing_support
