#include "netflow/state.hpp"

namespace netflow {

Rational l1_norm(const TestFunction& g) {
    Rational total(0);
    const auto& bp = g.breakpoints();
    for (std::size_t k = 0; k < g.pieces(); ++k) total += (bp[k + 1] - bp[k]) * norm1(g.values()[k]);
    return total;
}

bool is_nonnegative(const NetworkState& f) {
    for (const auto& v : f.values())
        for (const auto& [id, x] : v)
            if (sgn(x) < 0) return false;
    return true;
}

}  // namespace netflow
