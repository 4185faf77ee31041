#pragma once
// Structured 2D grids with interior masks. Interior nodes are the unknowns of
// every discrete problem; all other nodes carry homogeneous Dirichlet data.

#include <array>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

namespace explab {

struct Rectangle {
    double lx = 1.0, ly = 1.0;
};
struct Disk {
    double radius = 1.0;
};
/// Axis-aligned rectangles (x0,y0,x1,y1) whose union forms the domain.
struct RectUnion {
    std::vector<std::array<double, 4>> rects;
};
using DomainSpec = std::variant<Rectangle, Disk, RectUnion>;

class Grid2D {
public:
    Grid2D(int nx, int ny, double hx, double hy, double ox, double oy,
           std::vector<std::uint8_t> interior_mask);

    int nx = 0, ny = 0;
    double hx = 0, hy = 0;
    double ox = 0, oy = 0;  // lower-left corner
    std::vector<std::uint8_t> interior;      // per node, row-major j*nx+i
    std::vector<std::int32_t> interior_index;  // node -> unknown id, -1 outside
    std::vector<std::int32_t> interior_nodes;  // unknown id -> node
    std::int64_t n_interior = 0;

    double x(int i) const { return ox + i * hx; }
    double y(int j) const { return oy + j * hy; }
    int node(int i, int j) const { return j * nx + i; }
    bool is_interior(int i, int j) const {
        return i >= 0 && i < nx && j >= 0 && j < ny && interior[node(i, j)] != 0;
    }
    /// Nearest node to a physical point (clamped to the grid).
    std::pair<int, int> nearest_node(double px, double py) const;
};

using GridPtr = std::shared_ptr<const Grid2D>;

/// Build a grid from a domain spec at `resolution` nodes per unit length
/// (>= 8). Rectangles mark the open interior; disks use staircase masking
/// (nodes with |x-c| < R strictly).
GridPtr build_grid(const DomainSpec& spec, double resolution);

/// Same masks, but with explicit node counts per axis (ny defaults to a count
/// preserving the domain aspect ratio). Used where experiment configs pin
/// resolutions like 129/257/385 nodes.
GridPtr build_grid_nodes(const DomainSpec& spec, int nx_nodes, int ny_nodes = 0);

/// Re-mask a parent grid (e.g. restrict to one flow cell). Geometry is shared;
/// the mask must be a subset of the parent's interior.
GridPtr grid_with_mask(const Grid2D& parent, std::vector<std::uint8_t> interior_mask);

} // namespace explab
