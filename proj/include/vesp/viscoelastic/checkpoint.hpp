#pragma once

#include <string>
#include <vector>

#include "vesp/io.hpp"
#include "vesp/viscoelastic/state.hpp"

namespace vesp {

/// Writes a, u_i, E_ij (grid values) in the field container; t goes to the sidecar.
inline void write_state(const std::string& path, const SimState& s) {
    const int d = s.grid().dim;
    std::vector<Field> comps{inverse(s.a)};
    std::vector<std::string> names{"a"};
    for (int i = 0; i < d; ++i) {
        comps.push_back(inverse(s.u[i]));
        names.push_back("u" + std::to_string(i));
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            comps.push_back(inverse(s.E(i, j)));
            names.push_back("E" + std::to_string(i) + std::to_string(j));
        }
    write_fields(path, comps, names, {{"t", fmt17(s.t)}});
}

/// Reads a checkpoint back; the time is not part of the binary and is set to t.
inline SimState read_state(const std::string& path, double t = 0.0) {
    const auto comps = read_fields(path);
    const Grid& g = comps.front().grid();
    const int d = g.dim;
    require(comps.size() == static_cast<std::size_t>(1 + d + d * d), "checkpoint does not hold (a, u, E)");
    SimState s = rest_state(g);
    s.t = t;
    s.a = forward(comps[0]);
    for (int i = 0; i < d; ++i) s.u[i] = forward(comps[1 + i]);
    for (int k = 0; k < d * d; ++k) s.E[k] = forward(comps[1 + d + k]);
    return s;
}

}  // namespace vesp
