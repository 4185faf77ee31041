#include "explab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "explab/flow.hpp"
#include "explab/nonlinearity.hpp"

namespace explab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& s, const std::string& field) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw std::invalid_argument(field + ": not a number: '" + s + "'");
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    c.flow_params.clear();
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        std::string field = section + "." + key;

        if (section == "experiment") {
            if (key == "name") c.experiment = val;
            else if (key == "out") c.out_dir = val;
            else throw std::invalid_argument("unknown config field " + field);
        } else if (section == "flow") {
            if (key == "name") c.flow_name = val;
            else c.flow_params[key] = to_double(val, field);
        } else if (section == "nonlinearity") {
            if (key == "name") c.nonlinearity_name = val;
            else c.nonlinearity_params[key] = to_double(val, field);
        } else if (section == "grid") {
            if (key == "domain") {
                auto toks = split_ws(val);
                if (toks.size() < 2) throw std::invalid_argument(field + ": expected kind + size(s)");
                c.domain_kind = toks[0];
                c.domain_a = to_double(toks[1], field);
                c.domain_b = toks.size() > 2 ? to_double(toks[2], field) : c.domain_a;
            } else if (key == "resolutions") {
                c.resolutions.clear();
                for (const auto& t : split_ws(val))
                    c.resolutions.push_back((int)to_double(t, field));
            } else {
                throw std::invalid_argument("unknown config field " + field);
            }
        } else if (section == "sweep") {
            if (key == "amplitudes") {
                c.amplitudes.clear();
                for (const auto& t : split_ws(val)) c.amplitudes.push_back(to_double(t, field));
            } else {
                throw std::invalid_argument("unknown config field " + field);
            }
        } else if (section == "cells") {
            if (key == "seeds") {
                c.seeds.clear();
                for (const auto& t : split_ws(val)) {
                    double x, y;
                    if (std::sscanf(t.c_str(), "%lf,%lf", &x, &y) != 2)
                        throw std::invalid_argument(field + ": expected x,y pairs: '" + t + "'");
                    c.seeds.push_back({x, y});
                }
            } else if (key == "eps_sep") {
                c.eps_sep = to_double(val, field);
            } else if (key == "n_levels") {
                c.n_levels = (int)to_double(val, field);
            } else {
                throw std::invalid_argument("unknown config field " + field);
            }
        } else if (section == "tolerances") {
            if (key == "bisect_rtol") c.bisect_rtol = to_double(val, field);
            else throw std::invalid_argument("unknown config field " + field);
        } else {
            throw std::invalid_argument("unknown config section [" + section + "]");
        }
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "name = " << c.experiment << "\n";
    os << "out = " << c.out_dir << "\n\n";
    os << "[flow]\n";
    os << "name = " << c.flow_name << "\n";
    for (const auto& [k, v] : c.flow_params) os << k << " = " << fmt(v) << "\n";
    os << "\n[nonlinearity]\n";
    os << "name = " << c.nonlinearity_name << "\n";
    for (const auto& [k, v] : c.nonlinearity_params) os << k << " = " << fmt(v) << "\n";
    os << "\n[grid]\n";
    os << "domain = " << c.domain_kind << " " << fmt(c.domain_a) << " " << fmt(c.domain_b)
       << "\n";
    os << "resolutions =";
    for (int r : c.resolutions) os << " " << r;
    os << "\n\n[sweep]\namplitudes =";
    for (double a : c.amplitudes) os << " " << fmt(a);
    os << "\n\n[cells]\n";
    if (!c.seeds.empty()) {
        os << "seeds =";
        for (const auto& s : c.seeds) os << " " << fmt(s[0]) << "," << fmt(s[1]);
        os << "\n";
    }
    os << "eps_sep = " << fmt(c.eps_sep) << "\n";
    os << "n_levels = " << c.n_levels << "\n";
    os << "\n[tolerances]\n";
    os << "bisect_rtol = " << fmt(c.bisect_rtol) << "\n";
    return os.str();
}

void validate_config(const ExperimentConfig& c) {
    static const char* known_experiments[] = {"gelfand",  "bounds",       "fig2",
                                              "equidist", "stratify",     "compressible",
                                              "shear_growth"};
    bool ok = false;
    for (const char* e : known_experiments) ok = ok || c.experiment == e;
    if (!ok)
        throw std::invalid_argument("experiment.name: unknown experiment '" + c.experiment + "'");

    try {
        GridPtr tiny = build_grid_nodes(domain_from_config(c), 9);
        builtin_flow(c.flow_name, c.flow_params, tiny);
    } catch (const std::invalid_argument& e) {
        if (std::string(e.what()).find("unknown flow") != std::string::npos)
            throw std::invalid_argument("flow.name: unknown flow '" + c.flow_name + "'");
        throw;
    }
    try {
        Nonlinearity::make(c.nonlinearity_name, c.nonlinearity_params);
    } catch (const std::invalid_argument& e) {
        if (std::string(e.what()).find("unknown nonlinearity") != std::string::npos)
            throw std::invalid_argument("nonlinearity.name: unknown nonlinearity '" +
                                        c.nonlinearity_name + "'");
        throw std::invalid_argument(std::string("nonlinearity: ") + e.what());
    }
    for (int r : c.resolutions)
        if (r < 9) throw std::invalid_argument("grid.resolutions: need >= 9 nodes per axis");
    if (c.resolutions.empty()) throw std::invalid_argument("grid.resolutions: empty");
    for (std::size_t k = 1; k < c.amplitudes.size(); ++k)
        if (!(c.amplitudes[k] > c.amplitudes[k - 1]))
            throw std::invalid_argument("sweep.amplitudes: must be strictly increasing");
    if (c.bisect_rtol <= 0 || c.bisect_rtol > 0.1)
        throw std::invalid_argument("tolerances.bisect_rtol: expected in (0, 0.1]");
    if (c.n_levels < 32) throw std::invalid_argument("cells.n_levels: must be >= 32");
}

DomainSpec domain_from_config(const ExperimentConfig& c) {
    if (c.domain_kind == "rect") return Rectangle{c.domain_a, c.domain_b};
    if (c.domain_kind == "disk") return Disk{c.domain_a};
    throw std::invalid_argument("grid.domain: unknown kind '" + c.domain_kind + "'");
}

ExperimentConfig default_config(const std::string& experiment) {
    constexpr double twopi = 2.0 * std::numbers::pi;
    ExperimentConfig c;
    c.experiment = experiment;
    c.out_dir = "out/" + experiment;
    if (experiment == "gelfand") {
        c.domain_kind = "disk";
        c.domain_a = 1.0;
        c.resolutions = {97, 193, 385};
        c.amplitudes = {0.0};
        c.flow_name = "shear";
        c.flow_params = {{"c", 0.0}};
    } else if (experiment == "bounds") {
        c.resolutions = {129};
        c.amplitudes = {0.0, 64.0, 256.0, 1024.0};
        c.flow_name = "sinsin";
        c.flow_params = {};
    } else if (experiment == "fig2") {
        c.domain_kind = "rect";
        c.domain_a = c.domain_b = twopi;
        c.resolutions = {257};
        c.amplitudes = {64.0, 128.0, 256.0, 512.0};
        c.flow_name = "fig2";
        c.flow_params = {};
        c.n_levels = 96;
    } else if (experiment == "equidist") {
        c.resolutions = {129};
        c.amplitudes = {64.0, 128.0, 256.0, 512.0};
        c.flow_name = "sinsin";
        c.flow_params = {};
    } else if (experiment == "stratify") {
        c.domain_kind = "rect";
        c.domain_a = c.domain_b = 2.0;
        c.resolutions = {129};
        c.amplitudes = {0.0, 512.0};
        c.flow_name = "sinsin";
        c.flow_params = {};
    } else if (experiment == "compressible") {
        c.domain_kind = "disk";
        c.domain_a = 1.0;
        c.resolutions = {193};
        c.amplitudes = {1.0};
        c.flow_name = "radial";
        c.flow_params = {{"n", 1.0}};
    } else if (experiment == "shear_growth") {
        c.resolutions = {129};
        c.amplitudes = {0.0, 64.0, 256.0, 512.0};
        c.flow_name = "shear";
        c.flow_params = {{"c", 1.0}};
    } else {
        throw std::invalid_argument("experiment.name: unknown experiment '" + experiment + "'");
    }
    return c;
}

} // namespace explab
