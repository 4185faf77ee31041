#pragma once
// Flat key = value experiment configuration with [sections]; no nesting, no
// programmability. parse(serialize(c)) == c.

#include <map>
#include <string>
#include <vector>

#include "explab/grid.hpp"

namespace explab {

struct ExperimentConfig {
    std::string experiment;
    std::string out_dir = "out";

    std::string flow_name = "shear";
    std::map<std::string, double> flow_params{{"c", 0.0}};

    std::string nonlinearity_name = "exponential";
    std::map<std::string, double> nonlinearity_params;

    std::string domain_kind = "rect";        // rect | disk
    double domain_a = 1.0, domain_b = 1.0;   // rect: lx,ly ; disk: radius

    std::vector<int> resolutions{129};       // nodes per axis
    std::vector<double> amplitudes{0.0};

    std::vector<std::array<double, 2>> seeds;
    double eps_sep = 0.0;  // 0 = default 0.02 max|Psi|
    int n_levels = 96;

    double bisect_rtol = 1e-3;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Throws std::invalid_argument naming the offending field
/// (e.g. "flow.name: unknown flow 'vortex'").
void validate_config(const ExperimentConfig& c);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& c);

DomainSpec domain_from_config(const ExperimentConfig& c);

/// Built-in defaults per experiment name (gelfand, bounds, fig2, equidist,
/// stratify, compressible, shear_growth).
ExperimentConfig default_config(const std::string& experiment);

} // namespace explab
