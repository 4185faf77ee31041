#include "explab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace explab {

Grid2D::Grid2D(int nx_, int ny_, double hx_, double hy_, double ox_, double oy_,
               std::vector<std::uint8_t> interior_mask)
    : nx(nx_), ny(ny_), hx(hx_), hy(hy_), ox(ox_), oy(oy_),
      interior(std::move(interior_mask)) {
    if (nx < 3 || ny < 3) throw std::invalid_argument("Grid2D: nx, ny must be >= 3");
    if (hx <= 0 || hy <= 0) throw std::invalid_argument("Grid2D: spacings must be > 0");
    if ((std::int64_t)interior.size() != (std::int64_t)nx * ny)
        throw std::invalid_argument("Grid2D: mask size mismatch");

    // The outermost ring is always Dirichlet.
    for (int i = 0; i < nx; ++i) interior[node(i, 0)] = interior[node(i, ny - 1)] = 0;
    for (int j = 0; j < ny; ++j) interior[node(0, j)] = interior[node(nx - 1, j)] = 0;

    interior_index.assign((std::size_t)nx * ny, -1);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (interior[node(i, j)]) {
                interior_index[node(i, j)] = (std::int32_t)interior_nodes.size();
                interior_nodes.push_back(node(i, j));
            }
    n_interior = (std::int64_t)interior_nodes.size();
    if (n_interior == 0)
        throw std::invalid_argument("Grid2D: degenerate domain (empty interior)");

    // Connectivity: the interior must be one 4-connected component, so every
    // interior node reaches the Dirichlet boundary through interior nodes.
    std::vector<std::uint8_t> seen((std::size_t)nx * ny, 0);
    std::vector<std::int32_t> stack{interior_nodes[0]};
    seen[interior_nodes[0]] = 1;
    std::int64_t count = 0;
    while (!stack.empty()) {
        int nd = stack.back();
        stack.pop_back();
        ++count;
        int i = nd % nx, j = nd / nx;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            int ii = i + di[k], jj = j + dj[k];
            if (is_interior(ii, jj) && !seen[node(ii, jj)]) {
                seen[node(ii, jj)] = 1;
                stack.push_back(node(ii, jj));
            }
        }
    }
    if (count != n_interior)
        throw std::invalid_argument("Grid2D: interior is not connected");
}

std::pair<int, int> Grid2D::nearest_node(double px, double py) const {
    int i = (int)std::llround((px - ox) / hx);
    int j = (int)std::llround((py - oy) / hy);
    i = std::clamp(i, 0, nx - 1);
    j = std::clamp(j, 0, ny - 1);
    return {i, j};
}

namespace {

struct BBox {
    double x0, y0, x1, y1;
};

BBox bounding_box(const DomainSpec& spec) {
    if (auto* r = std::get_if<Rectangle>(&spec)) return {0.0, 0.0, r->lx, r->ly};
    if (auto* d = std::get_if<Disk>(&spec))
        return {-d->radius, -d->radius, d->radius, d->radius};
    const auto& u = std::get<RectUnion>(spec);
    if (u.rects.empty()) throw std::invalid_argument("build_grid: empty rectangle union");
    BBox b{u.rects[0][0], u.rects[0][1], u.rects[0][2], u.rects[0][3]};
    for (const auto& r : u.rects) {
        b.x0 = std::min(b.x0, r[0]);
        b.y0 = std::min(b.y0, r[1]);
        b.x1 = std::max(b.x1, r[2]);
        b.y1 = std::max(b.y1, r[3]);
    }
    return b;
}

bool in_closed_union(const RectUnion& u, double x, double y) {
    const double eps = 1e-12;
    for (const auto& r : u.rects)
        if (x >= r[0] - eps && x <= r[2] + eps && y >= r[1] - eps && y <= r[3] + eps)
            return true;
    return false;
}

GridPtr make_grid(const DomainSpec& spec, int nx, int ny) {
    BBox b = bounding_box(spec);
    if (nx < 3) nx = 3;
    if (ny < 3) ny = 3;
    double hx = (b.x1 - b.x0) / (nx - 1);
    double hy = (b.y1 - b.y0) / (ny - 1);
    std::vector<std::uint8_t> mask((std::size_t)nx * ny, 0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double x = b.x0 + i * hx, y = b.y0 + j * hy;
            bool in = false;
            if (auto* r = std::get_if<Rectangle>(&spec)) {
                in = x > 1e-12 && x < r->lx - 1e-12 && y > 1e-12 && y < r->ly - 1e-12;
            } else if (auto* d = std::get_if<Disk>(&spec)) {
                in = x * x + y * y < d->radius * d->radius - 1e-12;
            } else {
                // open-interior test at grid scale: the node and four probes a
                // half-step away must lie in the closed union
                const auto& u = std::get<RectUnion>(spec);
                in = in_closed_union(u, x, y) && in_closed_union(u, x - hx / 2, y) &&
                     in_closed_union(u, x + hx / 2, y) && in_closed_union(u, x, y - hy / 2) &&
                     in_closed_union(u, x, y + hy / 2);
            }
            if (in) mask[(std::size_t)j * nx + i] = 1;
        }
    }
    return std::make_shared<Grid2D>(nx, ny, hx, hy, b.x0, b.y0, std::move(mask));
}

} // namespace

GridPtr build_grid(const DomainSpec& spec, double resolution) {
    if (resolution < 8.0)
        throw std::invalid_argument("build_grid: resolution must be >= 8 nodes per unit");
    BBox b = bounding_box(spec);
    int nx = (int)std::llround((b.x1 - b.x0) * resolution);
    int ny = (int)std::llround((b.y1 - b.y0) * resolution);
    return make_grid(spec, nx, ny);
}

GridPtr build_grid_nodes(const DomainSpec& spec, int nx_nodes, int ny_nodes) {
    if (nx_nodes < 3) throw std::invalid_argument("build_grid_nodes: need >= 3 nodes");
    BBox b = bounding_box(spec);
    if (ny_nodes <= 0) {
        double aspect = (b.y1 - b.y0) / (b.x1 - b.x0);
        ny_nodes = (int)std::llround((nx_nodes - 1) * aspect) + 1;
    }
    return make_grid(spec, nx_nodes, ny_nodes);
}

GridPtr grid_with_mask(const Grid2D& parent, std::vector<std::uint8_t> interior_mask) {
    if (interior_mask.size() != parent.interior.size())
        throw std::invalid_argument("grid_with_mask: mask size mismatch");
    for (std::size_t k = 0; k < interior_mask.size(); ++k)
        if (interior_mask[k] && !parent.interior[k])
            throw std::invalid_argument("grid_with_mask: mask not a subset of parent interior");
    return std::make_shared<Grid2D>(parent.nx, parent.ny, parent.hx, parent.hy,
                                    parent.ox, parent.oy, std::move(interior_mask));
}

} // namespace explab
