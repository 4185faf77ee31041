#pragma once
// Node-valued scalar fields on a masked grid, plus CSV / binary checkpoints.

#include <iosfwd>
#include <string>
#include <vector>

#include "explab/grid.hpp"

namespace explab {

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, double fill = 0.0);
    ScalarField(GridPtr grid, std::vector<double> node_values);

    const Grid2D& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }

    double& at(int i, int j) { return v_[grid_->node(i, j)]; }
    double at(int i, int j) const { return v_[grid_->node(i, j)]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    /// Values at interior unknowns, in unknown order.
    std::vector<double> interior() const;
    /// Scatter interior-unknown values back onto nodes (boundary stays 0).
    static ScalarField from_interior(GridPtr grid, const std::vector<double>& q);

    double max() const;
    double min() const;
    double max_abs() const;
    /// Discrete norms over interior nodes with cell weight hx*hy.
    double norm_l1() const;
    double norm_l2() const;

    void write_csv(std::ostream& os) const;                // x,y,value rows
    void write_csv(const std::string& path) const;
    void write_binary(const std::string& path) const;      // header + row-major f64

private:
    GridPtr grid_;
    std::vector<double> v_;
};

/// Read a binary field dump. When `grid` is given it must match the header
/// geometry and supplies the mask; otherwise a plain rectangle mask (all inner
/// nodes interior) is reconstructed from the header.
ScalarField read_binary_field(const std::string& path, GridPtr grid = nullptr);
ScalarField read_csv_field(const std::string& path, GridPtr grid);

} // namespace explab
