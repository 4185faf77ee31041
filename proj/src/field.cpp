#include "explab/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "explab/kernels.hpp"

namespace explab {

ScalarField::ScalarField(GridPtr grid, double fill)
    : grid_(std::move(grid)), v_((std::size_t)grid_->nx * grid_->ny, fill) {
    // Dirichlet/exterior nodes hold 0 regardless of fill.
    if (fill != 0.0)
        for (std::size_t k = 0; k < v_.size(); ++k)
            if (!grid_->interior[k]) v_[k] = 0.0;
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> node_values)
    : grid_(std::move(grid)), v_(std::move(node_values)) {
    if (v_.size() != (std::size_t)grid_->nx * grid_->ny)
        throw std::invalid_argument("ScalarField: node value size mismatch");
}

std::vector<double> ScalarField::interior() const {
    std::vector<double> q(grid_->n_interior);
    for (std::int64_t k = 0; k < grid_->n_interior; ++k)
        q[k] = v_[grid_->interior_nodes[k]];
    return q;
}

ScalarField ScalarField::from_interior(GridPtr grid, const std::vector<double>& q) {
    if ((std::int64_t)q.size() != grid->n_interior)
        throw std::invalid_argument("ScalarField::from_interior: size mismatch");
    ScalarField f(grid);
    for (std::int64_t k = 0; k < grid->n_interior; ++k)
        f.v_[grid->interior_nodes[k]] = q[k];
    return f;
}

double ScalarField::max() const { return *std::max_element(v_.begin(), v_.end()); }
double ScalarField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double ScalarField::max_abs() const { return kern::max_abs(v_.data(), v_.size()); }

double ScalarField::norm_l1() const {
    double s = 0.0;
    for (std::int64_t k = 0; k < grid_->n_interior; ++k)
        s += std::abs(v_[grid_->interior_nodes[k]]);
    return s * grid_->hx * grid_->hy;
}

double ScalarField::norm_l2() const {
    double s = 0.0;
    for (std::int64_t k = 0; k < grid_->n_interior; ++k) {
        double t = v_[grid_->interior_nodes[k]];
        s += t * t;
    }
    return std::sqrt(s * grid_->hx * grid_->hy);
}

void ScalarField::write_csv(std::ostream& os) const {
    char buf[96];
    os << "x,y,value\n";
    for (int j = 0; j < grid_->ny; ++j)
        for (int i = 0; i < grid_->nx; ++i) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", grid_->x(i), grid_->y(j),
                          v_[grid_->node(i, j)]);
            os << buf;
        }
}

void ScalarField::write_csv(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_csv(os);
}

namespace {
struct BinHeader {
    std::int64_t nx, ny;
    double hx, hy, ox, oy;
};
} // namespace

void ScalarField::write_binary(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    BinHeader h{grid_->nx, grid_->ny, grid_->hx, grid_->hy, grid_->ox, grid_->oy};
    os.write(reinterpret_cast<const char*>(&h), sizeof h);
    os.write(reinterpret_cast<const char*>(v_.data()), (std::streamsize)(v_.size() * 8));
    if (!os) throw std::runtime_error("write failed: " + path);
}

ScalarField read_binary_field(const std::string& path, GridPtr grid) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    BinHeader h{};
    is.read(reinterpret_cast<char*>(&h), sizeof h);
    if (!is || h.nx < 3 || h.ny < 3) throw std::runtime_error("bad field header: " + path);
    if (grid) {
        if (grid->nx != h.nx || grid->ny != h.ny)
            throw std::runtime_error("field header does not match grid: " + path);
    } else {
        std::vector<std::uint8_t> mask((std::size_t)h.nx * h.ny, 1);
        grid = std::make_shared<Grid2D>((int)h.nx, (int)h.ny, h.hx, h.hy, h.ox, h.oy,
                                        std::move(mask));
    }
    std::vector<double> v((std::size_t)h.nx * h.ny);
    is.read(reinterpret_cast<char*>(v.data()), (std::streamsize)(v.size() * 8));
    if (!is) throw std::runtime_error("truncated field dump: " + path);
    return ScalarField(grid, std::move(v));
}

ScalarField read_csv_field(const std::string& path, GridPtr grid) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(is, line); // header
    ScalarField f(grid);
    while (std::getline(is, line)) {
        double x, y, val;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &val) == 3) {
            auto [i, j] = grid->nearest_node(x, y);
            f.at(i, j) = val;
        }
    }
    return f;
}

} // namespace explab
