#pragma once
// Velocity fields on a grid. Stream-derived flows take u = dPsi/dy,
// v = -dPsi/dx as centered differences of node-sampled Psi, which makes the
// discrete (centered) divergence vanish identically.

#include <map>
#include <string>
#include <vector>

#include "explab/grid.hpp"
#include "explab/stream.hpp"

namespace explab {

struct FlowField {
    GridPtr grid;
    std::vector<double> u, v;  // per node
    bool is_incompressible = true;
    std::string source;
    /// Advisory boundary check: max |u.n| over Dirichlet faces, relative to
    /// max speed. Streamline-bounded flows have ~0; shear through a box not.
    double un_boundary_rel = 0.0;
    bool un_zero_on_boundary = false;
    double max_speed = 0.0;

    double u_at(int i, int j) const { return u[(std::size_t)j * grid->nx + i]; }
    double v_at(int i, int j) const { return v[(std::size_t)j * grid->nx + i]; }
};

/// Max |centered divergence| over interior nodes.
double discrete_divergence(const FlowField& f);

FlowField flow_from_stream_function(const StreamFunction& psi, GridPtr grid);

/// Direct-formula flow; declared_incompressible triggers the divergence gate.
FlowField flow_from_formula(const std::string& source,
                            const std::function<std::array<double, 2>(double, double)>& uv,
                            GridPtr grid, bool declared_incompressible);

/// Catalog: sinsin, fig2 (stream-derived); shear {c} (u=(c,0));
/// radial {n} (u = 4 n x, the compressible counterexample).
FlowField builtin_flow(const std::string& name, const std::map<std::string, double>& params,
                       GridPtr grid);

/// The zero flow (shear with c=0); convenience for the u=0 baselines.
FlowField zero_flow(GridPtr grid);

} // namespace explab
