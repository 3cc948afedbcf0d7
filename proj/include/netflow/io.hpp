#pragma once

#include "netflow/graph.hpp"
#include "netflow/state.hpp"

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace netflow {

struct GraphFile {
    std::shared_ptr<const MetricGraph> graph;
    /// Present when the file has at least one `c` line.
    std::optional<VelocityProfile> velocities;
};

/// Line-oriented graph format, see docs/formats.md.
///   graph <name>
///   edge <id> <tail> <head>
///   w <i> <j> <p>/<q>
///   c <id> <value>        value: p/q, integer, decimal or sqrt(<p/q>)
GraphFile parse_graph(const std::string& text, const std::string& source = "<graph>");
GraphFile read_graph_file(const std::string& path);
std::string format_graph(const MetricGraph& g, const std::optional<VelocityProfile>& vel);

/// Raw content of a state-style file before value typing.
struct StepFile {
    std::string kind;  // state | testfn | absorption
    std::string name;
    std::vector<Rational> breakpoints;
    struct Entry {
        std::size_t piece = 0;
        EdgeId edge = 0;
        std::string value;
        int line = 0;
    };
    std::vector<Entry> entries;
    std::string source;
};

///   state <name>
///   bp <p0>/<q0> <p1>/<q1> ...
///   v <piece-index> <edge-id> <value>
StepFile parse_step_file(const std::string& text, const std::string& source = "<state>");
/// Values must be exact (integer or p/q).
NetworkState to_network_state(const StepFile& file);
/// Values may be decimals.
RealStepState to_real_state(const StepFile& file);

NetworkState read_state_file(const std::string& path);
RealStepState read_real_state_file(const std::string& path);
std::string format_state(const NetworkState& f, const std::string& name, const std::string& kind = "state");

/// CSV with header `s,edge_<id>,...`, one row per sample, 17 significant digits.
std::string format_csv(const SampledState<double>& f);
/// Complex samples: real-valued output uses the plain layout; otherwise each
/// edge gets `edge_<id>_re,edge_<id>_im` columns.
std::string format_csv(const SampledState<std::complex<double>>& f);
SampledState<double> parse_csv(const std::string& text);

void emit_plotdata(const SampledState<double>& f, const std::string& path);
void emit_plotdata(const SampledState<std::complex<double>>& f, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// "%.17g".
std::string format_real(double x);

}  // namespace netflow
