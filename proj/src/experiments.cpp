#include "explab/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "explab/freidlin.hpp"
#include "explab/version.hpp"

namespace explab {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// ============================================================================
// Digest / formatting / file sink
// ============================================================================

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
    return buf;
}

bool RunManifest::all_passed() const {
    for (const auto& t : tasks)
        if (t.status != "ok") return false;
    for (const auto& a : assertions)
        if (!a.pass) return false;
    return true;
}

namespace {

std::string fmtg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class Csv {
public:
    Csv(std::string schema, std::string header)
        : schema_(std::move(schema)), header_(std::move(header)) {}
    void row(const std::vector<std::string>& cells) {
        std::string r;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) r += ',';
            r += cells[i];
        }
        rows_.push_back(std::move(r));
    }
    std::string text() const {
        std::string out = "# explab " + std::string(kVersion) + " schema=" + schema_ + "\n";
        out += header_ + "\n";
        for (const auto& r : rows_) out += r + "\n";
        return out;
    }

private:
    std::string schema_, header_;
    std::vector<std::string> rows_;
};

class Workspace {
public:
    Workspace(std::string out_dir, RunManifest& manifest)
        : out_(std::move(out_dir)), manifest_(manifest) {
        std::error_code ec;
        fs::create_directories(out_, ec);
        // writability probe
        std::string probe = out_ + "/.explab_probe";
        {
            std::ofstream os(probe, std::ios::binary);
            if (!os) throw std::runtime_error("output directory not writable: " + out_);
        }
        fs::remove(probe, ec);
    }

    void write(const std::string& relpath, const std::string& content) {
        fs::path full = fs::path(out_) / relpath;
        std::error_code ec;
        fs::create_directories(full.parent_path(), ec);
        {
            std::ofstream os(full, std::ios::binary);
            if (!os) throw std::runtime_error("cannot open " + full.string());
            os.write(content.data(), (std::streamsize)content.size());
        }
        // verify-on-write: the manifest lists only files that read back intact
        std::ifstream is(full, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        std::string back = ss.str();
        if (back != content) throw std::runtime_error("write verification failed: " + relpath);
        manifest_.files.push_back(
            {relpath, (std::uint64_t)back.size(), hex64(fnv1a64(back.data(), back.size()))});
    }

    const std::string& dir() const { return out_; }

private:
    std::string out_;
    RunManifest& manifest_;
};

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    std::atomic<int> next{0};
    std::vector<std::string> errors(n);
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                } catch (...) {
                    errors[i] = "unknown error";
                }
            }
        });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error(e);
}

struct AssertSink {
    RunManifest& m;
    void check(const std::string& name, bool pass, const std::string& detail) {
        m.assertions.push_back({name, pass, detail});
        std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        std::fflush(stdout);
    }
};

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = (double)x.size();
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ============================================================================
// Shared run machinery
// ============================================================================

struct ThresholdTask {
    std::string label;       // flow label for the runs.csv row
    GridPtr grid;
    const FlowField* flow = nullptr;
    double amplitude = 0.0;
    Nonlinearity g = Nonlinearity::exponential();
    double rtol = 1e-3;
    bool with_diagnostics = true;  // sup phi / kappa1 at 0.9 lambda*

    // results
    ThresholdResult result;
    double sup_phi_09 = 0.0;
    double kappa1_09 = 0.0;
    double seconds = 0.0;
};

void run_threshold_task(ThresholdTask& t) {
    auto t0 = Clock::now();
    ThresholdOptions topt;
    topt.rtol = t.rtol;
    t.result = lambda_star(t.grid, *t.flow, t.amplitude, t.g, topt);
    if (t.with_diagnostics) {
        AdvectionDiffusionOperator op = assemble(t.grid, *t.flow, t.amplitude);
        MinimalSolutionResult ms = minimal_solution(op, 0.9 * t.result.lambda_star, t.g);
        t.sup_phi_09 = ms.phi.max();
        EigenResult stab = stability_eigenvalue(t.grid, *t.flow, t.amplitude,
                                                0.9 * t.result.lambda_star, ms.phi, t.g);
        t.kappa1_09 = stab.eigenvalue;
    }
    t.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string probes_string(const ThresholdResult& r) {
    std::string out;
    for (const auto& p : r.records) {
        if (!out.empty()) out += '|';
        out += fmtg(p.lambda);
        out += ':';
        out += to_string(p.status);
    }
    return out;
}

void runs_csv_row(Csv& csv, const ThresholdTask& t, int resolution) {
    csv.row({t.label, fmtg(t.amplitude), std::to_string(resolution),
             fmtg(t.result.lambda_star), fmtg(t.result.lambda_lo_solved),
             fmtg(t.result.lambda_hi_failed), fmtg(t.result.bounds.lower),
             fmtg(t.result.bounds.upper), fmtg(t.sup_phi_09), fmtg(t.kappa1_09),
             probes_string(t.result)});
}

Csv make_runs_csv() {
    return Csv("runs",
               "flow,amplitude,resolution,lambda_star,lambda_lo,lambda_hi,bound_lower,"
               "bound_upper,sup_phi_09,kappa1_09,probes");
}

void record_tasks(RunManifest& m, const std::vector<ThresholdTask>& tasks) {
    for (const auto& t : tasks)
        m.tasks.push_back({t.label + "@A=" + fmtg(t.amplitude), "ok", t.seconds, ""});
}

// ============================================================================
// gelfand: lambda*(u=0) on the disk vs the radial value 2
// ============================================================================

void experiment_gelfand(const ExperimentConfig& cfg, const RunOptions& opts, Workspace& ws,
                        RunManifest& m) {
    AssertSink as{m};
    const bool standard =
        cfg.nonlinearity_name == "exponential" && cfg.domain_kind == "disk" &&
        std::abs(cfg.domain_a - 1.0) < 1e-12;
    Nonlinearity g = Nonlinearity::make(cfg.nonlinearity_name, cfg.nonlinearity_params);

    std::vector<ThresholdTask> tasks(cfg.resolutions.size());
    std::vector<GridPtr> grids(cfg.resolutions.size());
    std::vector<FlowField> flows(cfg.resolutions.size());
    for (std::size_t i = 0; i < cfg.resolutions.size(); ++i) {
        grids[i] = build_grid_nodes(domain_from_config(cfg), cfg.resolutions[i]);
        flows[i] = zero_flow(grids[i]);
        tasks[i] = {"zero", grids[i], &flows[i], 0.0, g, cfg.bisect_rtol, true};
    }
    parallel_for((int)tasks.size(), opts.jobs, [&](int i) { run_threshold_task(tasks[i]); });
    record_tasks(m, tasks);

    Csv csv("gelfand",
            "resolution,n_interior,lambda_star,lambda_lo,lambda_hi,bound_lower,bound_upper,"
            "rel_err_vs_2");
    Csv runs = make_runs_csv();
    const std::map<int, double> tol{{97, 0.12}, {193, 0.08}, {385, 0.05}};
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const ThresholdResult& r = tasks[i].result;
        double rel = standard ? std::abs(r.lambda_star - 2.0) / 2.0 : 0.0;
        csv.row({std::to_string(cfg.resolutions[i]), std::to_string(grids[i]->n_interior),
                 fmtg(r.lambda_star), fmtg(r.lambda_lo_solved), fmtg(r.lambda_hi_failed),
                 fmtg(r.bounds.lower), fmtg(r.bounds.upper), fmtg(rel)});
        runs_csv_row(runs, tasks[i], cfg.resolutions[i]);
        as.check("sandwich_res" + std::to_string(cfg.resolutions[i]),
                 r.bounds.lower <= r.lambda_star && r.lambda_star <= 1.05 * r.bounds.upper,
                 "lower=" + fmtg(r.bounds.lower) + " lambda*=" + fmtg(r.lambda_star) +
                     " upper=" + fmtg(r.bounds.upper));
        if (standard) {
            auto it = tol.find(cfg.resolutions[i]);
            if (it != tol.end())
                as.check("gelfand_accuracy_res" + std::to_string(cfg.resolutions[i]),
                         rel <= it->second,
                         "lambda*=" + fmtg(r.lambda_star) + " rel_err=" + fmtg(rel) +
                             " tol=" + fmtg(it->second));
        }
    }
    ws.write("gelfand.csv", csv.text());
    ws.write("runs.csv", runs.text());

    // checkpoint a solution field at the coarsest resolution
    AdvectionDiffusionOperator op = assemble(grids[0], flows[0], 0.0);
    MinimalSolutionResult ms = minimal_solution(op, 0.9 * tasks[0].result.lambda_star, g);
    ms.phi.write_binary(ws.dir() + "/gelfand_phi.bin");
    {
        ScalarField back = read_binary_field(ws.dir() + "/gelfand_phi.bin", grids[0]);
        std::ifstream is(ws.dir() + "/gelfand_phi.bin", std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        std::string bytes = ss.str();
        m.files.push_back({"gelfand_phi.bin", (std::uint64_t)bytes.size(),
                           hex64(fnv1a64(bytes.data(), bytes.size()))});
        (void)back;
    }
    std::ostringstream oss;
    ms.phi.write_csv(oss);
    ws.write("gelfand_phi.csv", oss.str());
}

// ============================================================================
// bounds: the sandwich over catalog configurations x amplitudes
// ============================================================================

void experiment_bounds(const ExperimentConfig& cfg, const RunOptions& opts, Workspace& ws,
                       RunManifest& m) {
    AssertSink as{m};
    constexpr double twopi = 2.0 * std::numbers::pi;
    const int res = cfg.resolutions[0];

    struct CatalogEntry {
        std::string label;
        DomainSpec domain;
        std::string flow;
        std::map<std::string, double> flow_params;
        std::string g_name;
        std::map<std::string, double> g_params;
    };
    const std::vector<CatalogEntry> catalog = {
        {"square-zero-exp", Rectangle{1, 1}, "shear", {{"c", 0.0}}, "exponential", {}},
        {"square-sinsin-exp", Rectangle{1, 1}, "sinsin", {}, "exponential", {}},
        {"square-sinsin-pow2", Rectangle{1, 1}, "sinsin", {}, "power", {{"m", 2.0}}},
        {"square-shear-exp", Rectangle{1, 1}, "shear", {{"c", 1.0}}, "exponential", {}},
        {"fourcell-sinsin-exp", Rectangle{2, 2}, "sinsin", {}, "exponential", {}},
    };
    (void)twopi;

    struct Slot {
        ThresholdTask task;
        int cat = 0;
        double A = 0.0;
    };
    std::vector<GridPtr> grids;
    std::vector<FlowField> flows;
    std::vector<double> theta0_by_cat(catalog.size(), 0.0);
    grids.reserve(catalog.size());
    flows.reserve(catalog.size());
    for (const auto& e : catalog) {
        GridPtr grid = build_grid_nodes(e.domain, res);
        grids.push_back(grid);
        flows.push_back(builtin_flow(e.flow, e.flow_params, grid));
    }
    // flow-free exit time per grid (theta uniformity baselines)
    for (std::size_t c = 0; c < catalog.size(); ++c) {
        FlowField still = zero_flow(grids[c]);
        theta0_by_cat[c] = theta(exit_time(grids[c], still, 0.0));
    }

    std::vector<Slot> slots;
    for (std::size_t c = 0; c < catalog.size(); ++c)
        for (double A : cfg.amplitudes) {
            Slot s;
            s.cat = (int)c;
            s.A = A;
            s.task = {catalog[c].label, grids[c], &flows[c], A,
                      Nonlinearity::make(catalog[c].g_name, catalog[c].g_params),
                      cfg.bisect_rtol, true};
            slots.push_back(std::move(s));
        }
    parallel_for((int)slots.size(), opts.jobs, [&](int i) { run_threshold_task(slots[i].task); });

    Csv csv("bounds",
            "config,flow,nonlinearity,amplitude,resolution,theta,mu1,bound_lower,bound_upper,"
            "lambda_star,in_sandwich");
    Csv runs = make_runs_csv();
    double theta_worst_ratio = 0.0;
    for (auto& s : slots) {
        const ThresholdResult& r = s.task.result;
        bool sandwich = r.bounds.lower <= r.lambda_star && r.lambda_star <= 1.05 * r.bounds.upper;
        csv.row({catalog[s.cat].label, catalog[s.cat].flow, catalog[s.cat].g_name, fmtg(s.A),
                 std::to_string(res), fmtg(r.bounds.theta), fmtg(r.bounds.mu1),
                 fmtg(r.bounds.lower), fmtg(r.bounds.upper), fmtg(r.lambda_star),
                 sandwich ? "1" : "0"});
        runs_csv_row(runs, s.task, res);
        m.tasks.push_back({catalog[s.cat].label + "@A=" + fmtg(s.A), "ok", s.task.seconds, ""});
        as.check("sandwich_" + catalog[s.cat].label + "_A" + fmtg(s.A), sandwich,
                 "lower=" + fmtg(r.bounds.lower) + " lambda*=" + fmtg(r.lambda_star) +
                     " 1.05*upper=" + fmtg(1.05 * r.bounds.upper));
        theta_worst_ratio = std::max(theta_worst_ratio, r.bounds.theta / theta0_by_cat[s.cat]);
    }

    // flow-free reference values on the unit square
    const Slot* zero_row = nullptr;
    const Slot* shear_zero = nullptr;
    for (const auto& s : slots) {
        if (catalog[s.cat].label == "square-zero-exp" && s.A == cfg.amplitudes.front())
            zero_row = &s;
        if (catalog[s.cat].label == "square-shear-exp" && s.A == 0.0) shear_zero = &s;
    }
    if (zero_row) {
        const Bounds& b = zero_row->task.result.bounds;
        as.check("flowfree_lower_4.70", std::abs(b.lower - 4.704) / 4.704 < 0.02,
                 "lower=" + fmtg(b.lower) + " expected ~4.704");
        as.check("flowfree_upper_19.74", std::abs(b.upper - 19.739) / 19.739 < 0.02,
                 "upper=" + fmtg(b.upper) + " expected ~19.739");
        if (shear_zero)
            as.check("zero_amplitude_equals_flowfree",
                     shear_zero->task.result.lambda_star == zero_row->task.result.lambda_star,
                     "shear(c=1,A=0) lambda*=" + fmtg(shear_zero->task.result.lambda_star) +
                         " vs zero-flow " + fmtg(zero_row->task.result.lambda_star));
    }
    as.check("theta_flow_uniform", theta_worst_ratio <= 1.05,
             "max theta/theta0 over incompressible rows = " + fmtg(theta_worst_ratio));

    // Prop. 2.6-style sup bound over the sinsin sweep records, delta = 0.25
    for (const auto& s : slots) {
        if (catalog[s.cat].label != "square-sinsin-exp") continue;
        UniformBoundReport rep = uniform_bound_check(s.task.result,
                                                     Nonlinearity::exponential(), 0.25);
        as.check("uniform_bound_sinsin_A" + fmtg(s.A), rep.ok,
                 "K(0.25)=" + fmtg(rep.K) + " worst margin=" + fmtg(rep.worst_margin));
    }
    ws.write("bounds_curve.csv", csv.text());
    ws.write("runs.csv", runs.text());
}

// ============================================================================
// fig2: whole-domain vs per-cell vs Freidlin
// ============================================================================

void experiment_fig2(const ExperimentConfig& cfg, const RunOptions& opts, Workspace& ws,
                     RunManifest& m) {
    AssertSink as{m};
    Nonlinearity g = Nonlinearity::make(cfg.nonlinearity_name, cfg.nonlinearity_params);
    StreamFunction psi = make_stream(cfg.flow_name, cfg.flow_params);

    const int N = cfg.resolutions[0];
    const int NF = 2 * N - 1;  // one-level refinement for the h-extrapolation
    const double Amax = cfg.amplitudes.back();

    std::vector<std::array<double, 2>> seeds = !opts.seed_override.empty() ? opts.seed_override
                                               : !cfg.seeds.empty()        ? cfg.seeds
                                                                           : [&] {
        auto d = fig2_cell_seeds();
        return std::vector<std::array<double, 2>>(d.begin(), d.end());
    }();

    GridPtr grid = build_grid_nodes(domain_from_config(cfg), N);
    GridPtr grid_f = build_grid_nodes(domain_from_config(cfg), NF);
    FlowField flow = flow_from_stream_function(psi, grid);
    FlowField flow_f = flow_from_stream_function(psi, grid_f);
    std::vector<CellSpec> cells = detect_cells(psi, *grid, seeds, cfg.eps_sep);
    std::vector<CellSpec> cells_f = detect_cells(psi, *grid_f, seeds, cfg.eps_sep);
    const std::size_t J = cells.size();

    std::int64_t covered = 0;
    for (const auto& c : cells) covered += c.member_count;
    as.check("cells_cover_80pct", covered >= (std::int64_t)(0.8 * (double)grid->n_interior),
             fmtg(100.0 * (double)covered / (double)grid->n_interior) + "% of interior nodes in " +
                 std::to_string(J) + " cells");

    std::vector<GridPtr> cell_grids(J), cell_grids_f(J);
    for (std::size_t j = 0; j < J; ++j) {
        cell_grids[j] = grid_with_mask(*grid, cells[j].domain_mask);
        cell_grids_f[j] = grid_with_mask(*grid_f, cells_f[j].domain_mask);
    }

    // task layout: domain x A, fine domain (Amax), cells x A, fine cells (Amax)
    const std::size_t nA = cfg.amplitudes.size();
    std::vector<ThresholdTask> tasks;
    for (std::size_t a = 0; a < nA; ++a)
        tasks.push_back({"fig2-domain", grid, &flow, cfg.amplitudes[a], g, cfg.bisect_rtol,
                         cfg.amplitudes[a] == Amax});
    tasks.push_back({"fig2-domain-fine", grid_f, &flow_f, Amax, g, cfg.bisect_rtol, false});
    const std::size_t cell_base = tasks.size();
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t a = 0; a < nA; ++a)
            tasks.push_back({"fig2-cell" + std::to_string(j), cell_grids[j], &flow,
                             cfg.amplitudes[a], g, cfg.bisect_rtol, false});
    const std::size_t cell_fine_base = tasks.size();
    for (std::size_t j = 0; j < J; ++j)
        tasks.push_back({"fig2-cell" + std::to_string(j) + "-fine", cell_grids_f[j], &flow_f,
                         Amax, g, cfg.bisect_rtol, false});

    // heavy tasks first so the pool stays busy
    parallel_for((int)tasks.size(), opts.jobs, [&](int i) { run_threshold_task(tasks[i]); });
    record_tasks(m, tasks);

    // Freidlin per cell on the main grid
    std::vector<double> lbar(J);
    std::vector<LevelCoefficients> coeffs;
    for (std::size_t j = 0; j < J; ++j) {
        coeffs.push_back(level_coefficients(psi, *grid, cells[j], cfg.n_levels));
        FreidlinThreshold ft = freidlin_lambda_star(coeffs[j], g);
        lbar[j] = ft.lambda_star;
    }
    double min_lbar = *std::min_element(lbar.begin(), lbar.end());

    auto dom = [&](std::size_t a) { return tasks[a].result.lambda_star; };
    auto cell = [&](std::size_t j, std::size_t a) {
        return tasks[cell_base + j * nA + a].result.lambda_star;
    };
    auto cell_fine = [&](std::size_t j) {
        return tasks[cell_fine_base + j].result.lambda_star;
    };
    double dom_fine = tasks[nA].result.lambda_star;
    double dom_extrap = 2.0 * dom_fine - dom(nA - 1);

    Csv curve("fig2_curve", [&] {
        std::string h = "A,lambda_domain,min_cell";
        for (std::size_t j = 0; j < J; ++j) h += ",cell" + std::to_string(j + 1);
        h += ",gap_domain_vs_mincell";
        return h;
    }());
    std::vector<double> gaps(nA);
    for (std::size_t a = 0; a < nA; ++a) {
        double mc = cell(0, a);
        for (std::size_t j = 1; j < J; ++j) mc = std::min(mc, cell(j, a));
        gaps[a] = (mc - dom(a)) / mc;
        std::vector<std::string> row{fmtg(cfg.amplitudes[a]), fmtg(dom(a)), fmtg(mc)};
        for (std::size_t j = 0; j < J; ++j) row.push_back(fmtg(cell(j, a)));
        row.push_back(fmtg(gaps[a]));
        curve.row(row);
        as.check("domain_below_cells_A" + fmtg(cfg.amplitudes[a]), dom(a) <= 1.02 * mc,
                 "domain=" + fmtg(dom(a)) + " min_cell=" + fmtg(mc));
    }
    as.check("mincell_gap_shrinking", gaps[nA - 1] <= gaps[0],
             "gap(A=" + fmtg(cfg.amplitudes[0]) + ")=" + fmtg(gaps[0]) +
                 " -> gap(A=" + fmtg(Amax) + ")=" + fmtg(gaps[nA - 1]));

    double gap_theorem = std::abs(dom_extrap - min_lbar) / min_lbar;
    double min_cell_extrap = 1e300;
    for (std::size_t j = 0; j < J; ++j)
        min_cell_extrap = std::min(min_cell_extrap, 2.0 * cell_fine(j) - cell(j, nA - 1));
    double gap_mincell_extrap = std::abs(min_cell_extrap - dom_extrap) / min_cell_extrap;
    as.check("limit_gap_theorem_10pct", gap_theorem <= 0.10,
             "h-extrapolated domain " + fmtg(dom_extrap) + " vs min Freidlin " + fmtg(min_lbar) +
                 " gap=" + fmtg(gap_theorem) + " (domain-vs-min-cell extrapolated gap: " +
                 fmtg(gap_mincell_extrap) + ", raw at A=" + fmtg(Amax) + ": " +
                 fmtg(gaps[nA - 1]) + ")");

    Csv fcsv("fig2_freidlin",
             "cell,H0,lambda_bar,lambda_cell_raw,lambda_cell_fine,lambda_cell_extrap,"
             "ratio_extrap_vs_bar");
    for (std::size_t j = 0; j < J; ++j) {
        double extr = 2.0 * cell_fine(j) - cell(j, nA - 1);
        double ratio = extr / lbar[j];
        fcsv.row({std::to_string(j + 1), fmtg(cells[j].H0), fmtg(lbar[j]),
                  fmtg(cell(j, nA - 1)), fmtg(cell_fine(j)), fmtg(extr), fmtg(ratio)});
        as.check("cell" + std::to_string(j + 1) + "_freidlin_15pct",
                 std::abs(ratio - 1.0) <= 0.15,
                 "extrapolated 2D " + fmtg(extr) + " vs Freidlin " + fmtg(lbar[j]) +
                     " ratio=" + fmtg(ratio));
        std::ostringstream table;
        table << "h,T,p,P\n";
        for (std::size_t k = 0; k < coeffs[j].h.size(); ++k)
            table << fmtg(coeffs[j].h[k]) << ',' << fmtg(coeffs[j].T[k]) << ','
                  << fmtg(coeffs[j].p[k]) << ',' << fmtg(coeffs[j].P[k]) << "\n";
        ws.write("fig2_cell" + std::to_string(j + 1) + "_coeffs.csv", table.str());
    }

    Csv summary("fig2_summary", "quantity,value");
    summary.row({"domain_Amax_raw", fmtg(dom(nA - 1))});
    summary.row({"domain_Amax_fine", fmtg(dom_fine)});
    summary.row({"domain_Amax_extrap", fmtg(dom_extrap)});
    summary.row({"min_freidlin", fmtg(min_lbar)});
    summary.row({"min_cell_extrap", fmtg(min_cell_extrap)});
    summary.row({"gap_theorem", fmtg(gap_theorem)});
    summary.row({"gap_mincell_extrap", fmtg(gap_mincell_extrap)});

    Csv runs = make_runs_csv();
    for (std::size_t i = 0; i < tasks.size(); ++i)
        runs_csv_row(runs, tasks[i], i == nA || i >= cell_fine_base ? NF : N);
    ws.write("fig2_curve.csv", curve.text());
    ws.write("fig2_freidlin.csv", fcsv.text());
    ws.write("fig2_summary.csv", summary.text());
    ws.write("runs.csv", runs.text());
}

// ============================================================================
// equidist: Prop. 3.1 scaling
// ============================================================================

void experiment_equidist(const ExperimentConfig& cfg, const RunOptions& opts, Workspace& ws,
                         RunManifest& m) {
    AssertSink as{m};
    Nonlinearity g = Nonlinearity::make(cfg.nonlinearity_name, cfg.nonlinearity_params);
    const int res = cfg.resolutions[0];
    GridPtr grid = build_grid_nodes(domain_from_config(cfg), res);
    FlowField flow = builtin_flow(cfg.flow_name, cfg.flow_params, grid);

    std::vector<double> As{0.0};
    for (double a : cfg.amplitudes)
        if (a > 0.0) As.push_back(a);

    struct Row {
        double A = 0, lstar = 0, lused = 0, integral = 0;
        double seconds = 0;
    };
    std::vector<Row> rows(As.size());
    parallel_for((int)As.size(), opts.jobs, [&](int i) {
        auto t0 = Clock::now();
        ThresholdOptions topt;
        topt.rtol = cfg.bisect_rtol;
        ThresholdResult r = lambda_star(grid, flow, As[i], g, topt);
        AdvectionDiffusionOperator op = assemble(grid, flow, As[i]);
        MinimalSolutionResult ms = minimal_solution(op, 0.5 * r.lambda_star, g);
        rows[i] = {As[i], r.lambda_star, 0.5 * r.lambda_star,
                   equidistribution_norm(ms.phi, flow),
                   std::chrono::duration<double>(Clock::now() - t0).count()};
    });

    Csv csv("equidist", "A,lambda_star,lambda_used,integral");
    std::vector<double> lx, ly;
    double i0 = 0.0, imax = 0.0, i256 = 0.0, i512 = 0.0;
    for (const auto& r : rows) {
        csv.row({fmtg(r.A), fmtg(r.lstar), fmtg(r.lused), fmtg(r.integral)});
        m.tasks.push_back({"equidist@A=" + fmtg(r.A), "ok", r.seconds, ""});
        if (r.A == 0.0) i0 = r.integral;
        else {
            lx.push_back(std::log(r.A));
            ly.push_back(std::log(r.integral));
        }
        imax = std::max(imax, r.integral);
        if (r.A == 256.0) i256 = r.integral;
        if (r.A == 512.0) i512 = r.integral;
    }
    double slope = lsq_slope(lx, ly);
    as.check("equidist_slope", slope >= -1.3 && slope <= -0.7,
             "log-log slope = " + fmtg(slope) + " (expected in [-1.3,-0.7])");
    as.check("equidist_A0_largest", std::isfinite(i0) && i0 >= imax,
             "I(0)=" + fmtg(i0) + " max over sweep=" + fmtg(imax));
    if (i256 > 0 && i512 > 0)
        as.check("equidist_doubling", i256 / i512 >= 1.6,
                 "I(256)/I(512)=" + fmtg(i256 / i512));
    ws.write("equidist_curve.csv", csv.text());
}

// ============================================================================
// stratify: exit time small on the separatrix skeleton
// ============================================================================

void experiment_stratify(const ExperimentConfig& cfg, const RunOptions& opts, Workspace& ws,
                         RunManifest& m) {
    AssertSink as{m};
    const int res = cfg.resolutions[0];
    GridPtr grid = build_grid_nodes(domain_from_config(cfg), res);
    StreamFunction psi = make_stream(cfg.flow_name, cfg.flow_params);
    FlowField flow = flow_from_stream_function(psi, grid);

    double pmax = 0.0;
    std::vector<double> P((std::size_t)grid->nx * grid->ny);
    for (int j = 0; j < grid->ny; ++j)
        for (int i = 0; i < grid->nx; ++i) {
            P[grid->node(i, j)] = psi.eval(grid->x(i), grid->y(j));
            pmax = std::max(pmax, std::abs(P[grid->node(i, j)]));
        }
    double eps = cfg.eps_sep > 0 ? cfg.eps_sep : 0.02 * pmax;

    std::vector<std::int64_t> skeleton;
    for (std::int64_t k = 0; k < grid->n_interior; ++k)
        if (std::abs(P[grid->interior_nodes[k]]) <= eps)
            skeleton.push_back(grid->interior_nodes[k]);

    struct Row {
        double A = 0, th = 0, th_skel = 0, ratio = 0, seconds = 0;
    };
    std::vector<Row> rows(cfg.amplitudes.size());
    parallel_for((int)cfg.amplitudes.size(), opts.jobs, [&](int i) {
        auto t0 = Clock::now();
        ScalarField tau = exit_time(grid, flow, cfg.amplitudes[i]);
        double th = theta(tau), ts = 0.0;
        for (std::int64_t nd : skeleton) ts = std::max(ts, tau.values()[nd]);
        rows[i] = {cfg.amplitudes[i], th, ts, ts / th,
                   std::chrono::duration<double>(Clock::now() - t0).count()};
    });

    Csv csv("stratify", "A,theta,theta_skeleton,ratio,skeleton_nodes");
    for (const auto& r : rows) {
        csv.row({fmtg(r.A), fmtg(r.th), fmtg(r.th_skel), fmtg(r.ratio),
                 std::to_string(skeleton.size())});
        m.tasks.push_back({"stratify@A=" + fmtg(r.A), "ok", r.seconds, ""});
        if (r.A == 0.0)
            as.check("stratify_A0_comparable", r.ratio > 0.5, "ratio=" + fmtg(r.ratio));
        if (r.A == cfg.amplitudes.back() && r.A > 0.0)
            as.check("stratify_skeleton_cold", r.ratio <= 0.2,
                     "A=" + fmtg(r.A) + " ratio=" + fmtg(r.ratio));
    }
    as.check("skeleton_definition", !skeleton.empty(),
             std::to_string(skeleton.size()) + " nodes with |Psi| <= " + fmtg(eps));
    ws.write("stratify.csv", csv.text());
}

// ============================================================================
// compressible: Eq. (42) counterexample
// ============================================================================

void experiment_compressible(const ExperimentConfig& cfg, const RunOptions& opts, Workspace& ws,
                             RunManifest& m) {
    AssertSink as{m};
    Nonlinearity g = Nonlinearity::make(cfg.nonlinearity_name, cfg.nonlinearity_params);
    const int res = cfg.resolutions[0];
    GridPtr grid = build_grid_nodes(domain_from_config(cfg), res);

    const std::vector<double> ns{0, 1, 2, 3};
    std::vector<FlowField> flows;
    for (double n : ns) flows.push_back(builtin_flow("radial", {{"n", n}}, grid));

    std::vector<ThresholdTask> tasks(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i)
        tasks[i] = {"radial-n" + fmtg(ns[i]), grid, &flows[i], 1.0, g, cfg.bisect_rtol, false};
    parallel_for((int)tasks.size(), opts.jobs, [&](int i) { run_threshold_task(tasks[i]); });
    record_tasks(m, tasks);

    Csv csv("compressible", "n,mu1,lambda_star,bound_lower,bound_upper,is_incompressible");
    Csv runs = make_runs_csv();
    bool decreasing = true;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const Bounds& b = tasks[i].result.bounds;
        csv.row({fmtg(ns[i]), fmtg(b.mu1), fmtg(tasks[i].result.lambda_star), fmtg(b.lower),
                 fmtg(b.upper), flows[i].is_incompressible ? "1" : "0"});
        runs_csv_row(runs, tasks[i], res);
        if (i > 0 && !(b.mu1 < tasks[i - 1].result.bounds.mu1)) decreasing = false;
    }
    double mu0 = tasks[0].result.bounds.mu1, mu3 = tasks[3].result.bounds.mu1;
    double l0 = tasks[0].result.lambda_star, l3 = tasks[3].result.lambda_star;
    as.check("mu_strictly_decreasing", decreasing,
             "mu1 = " + fmtg(mu0) + ", " + fmtg(tasks[1].result.bounds.mu1) + ", " +
                 fmtg(tasks[2].result.bounds.mu1) + ", " + fmtg(mu3));
    as.check("mu3_below_tenth", mu3 < 0.1 * mu0, "mu1(3)/mu1(0) = " + fmtg(mu3 / mu0));
    as.check("lambda3_below_fifth", l3 < 0.2 * l0, "lambda*(3)/lambda*(0) = " + fmtg(l3 / l0));
    as.check("uniformity_blocked_for_compressible",
             !flows[1].is_incompressible && !flows[3].is_incompressible,
             "radial rows carry is_incompressible=false; theta-uniformity not asserted");
    ws.write("compressible_curve.csv", csv.text());
    ws.write("runs.csv", runs.text());
}

// ============================================================================
// shear_growth: growth vs plateau regimes
// ============================================================================

void experiment_shear_growth(const ExperimentConfig& cfg, const RunOptions& opts, Workspace& ws,
                             RunManifest& m) {
    AssertSink as{m};
    Nonlinearity g = Nonlinearity::make(cfg.nonlinearity_name, cfg.nonlinearity_params);
    const int res = cfg.resolutions[0];
    GridPtr grid = build_grid_nodes(domain_from_config(cfg), res);
    std::vector<std::pair<std::string, FlowField>> flows;
    flows.emplace_back("shear", builtin_flow("shear", {{"c", 1.0}}, grid));
    flows.emplace_back("sinsin", builtin_flow("sinsin", {}, grid));

    std::vector<ThresholdTask> tasks;
    for (auto& [name, fl] : flows)
        for (double A : cfg.amplitudes)
            tasks.push_back({name, grid, &fl, A, g, cfg.bisect_rtol, false});
    parallel_for((int)tasks.size(), opts.jobs, [&](int i) { run_threshold_task(tasks[i]); });
    record_tasks(m, tasks);

    Csv csv("shear_growth", "flow,A,lambda_star,bound_lower,bound_upper,in_sandwich");
    Csv runs = make_runs_csv();
    std::map<std::pair<std::string, double>, double> ls;
    for (auto& t : tasks) {
        const ThresholdResult& r = t.result;
        bool sandwich = r.bounds.lower <= r.lambda_star && r.lambda_star <= 1.05 * r.bounds.upper;
        csv.row({t.label, fmtg(t.amplitude), fmtg(r.lambda_star), fmtg(r.bounds.lower),
                 fmtg(r.bounds.upper), sandwich ? "1" : "0"});
        runs_csv_row(runs, t, res);
        ls[{t.label, t.amplitude}] = r.lambda_star;
        as.check("sandwich_" + t.label + "_A" + fmtg(t.amplitude), sandwich,
                 "lower=" + fmtg(r.bounds.lower) + " lambda*=" + fmtg(r.lambda_star) +
                     " 1.05*upper=" + fmtg(1.05 * r.bounds.upper));
    }
    double A0 = cfg.amplitudes.front(), A1 = cfg.amplitudes.back();
    double shear_ratio = ls[{"shear", A1}] / ls[{"shear", A0}];
    double sinsin_ratio = ls[{"sinsin", A1}] / ls[{"sinsin", A0}];
    as.check("shear_growth_2x", shear_ratio >= 2.0,
             "shear lambda*(A=" + fmtg(A1) + ")/lambda*(A=" + fmtg(A0) +
                 ") = " + fmtg(shear_ratio));
    as.check("sinsin_plateau_1.5x", sinsin_ratio <= 1.5,
             "sinsin lambda*(A=" + fmtg(A1) + ")/lambda*(A=" + fmtg(A0) +
                 ") = " + fmtg(sinsin_ratio));
    ws.write("shear_growth_curve.csv", csv.text());
    ws.write("runs.csv", runs.text());
}

} // namespace

// ============================================================================
// Dispatcher, plots, schema, manifest
// ============================================================================

std::string schema_md_text() {
    std::ostringstream os;
    os << "# CSV schemas (explab " << kVersion << ")\n\n";
    os << "Every CSV starts with a comment line `# explab <version> schema=<id>`\n";
    os << "followed by a header row. Downstream plots should reject files whose\n";
    os << "schema id or version they do not recognize.\n\n";
    os << "## runs\nPer-threshold-run record, one row per (flow, amplitude) task.\n"
          "Columns: flow, amplitude, resolution, lambda_star, lambda_lo (largest\n"
          "converged probe), lambda_hi (smallest failed probe), bound_lower\n"
          "(supersolution bound), bound_upper (mu1/g'(0)), sup_phi_09 (sup of the\n"
          "minimal solution at 0.9 lambda*), kappa1_09 (stability eigenvalue there;\n"
          "0 when not computed), probes (lambda:status list, | separated).\n\n";
    os << "## gelfand\nColumns: resolution, n_interior, lambda_star, lambda_lo,\n"
          "lambda_hi, bound_lower, bound_upper, rel_err_vs_2.\n\n";
    os << "## bounds\nColumns: config, flow, nonlinearity, amplitude, resolution,\n"
          "theta (sup exit time), mu1, bound_lower, bound_upper, lambda_star,\n"
          "in_sandwich (1/0).\n\n";
    os << "## fig2_curve\nColumns: A, lambda_domain, min_cell, cell1..cellJ,\n"
          "gap_domain_vs_mincell ((min_cell - domain)/min_cell, same grid).\n\n";
    os << "## fig2_freidlin\nColumns: cell, H0, lambda_bar (effective 1D threshold),\n"
          "lambda_cell_raw (main grid), lambda_cell_fine (refined grid),\n"
          "lambda_cell_extrap (h->0 Richardson), ratio_extrap_vs_bar.\n\n";
    os << "## fig2_summary\nColumns: quantity, value. Quantities: domain_Amax_raw/\n"
          "fine/extrap, min_freidlin, min_cell_extrap, gap_theorem (extrapolated\n"
          "domain vs min Freidlin), gap_mincell_extrap.\n\n";
    os << "## equidist\nColumns: A, lambda_star, lambda_used (= lambda*/2), integral\n"
          "(midpoint quadrature of |u.grad phi|^2, unit-amplitude profile u).\n\n";
    os << "## stratify\nColumns: A, theta, theta_skeleton (max exit time over nodes\n"
          "with |Psi| <= eps_sep), ratio, skeleton_nodes.\n\n";
    os << "## compressible\nColumns: n, mu1, lambda_star, bound_lower, bound_upper,\n"
          "is_incompressible.\n\n";
    os << "## shear_growth\nColumns: flow, A, lambda_star, bound_lower, bound_upper,\n"
          "in_sandwich.\n\n";
    os << "## cell coefficient tables (fig2_cell<j>_coeffs.csv)\n"
          "Columns: h, T, p, P. No schema comment line; one file per cell.\n\n";
    os << "## field CSV dumps\nColumns: x, y, value, one row per node including\n"
          "Dirichlet boundary nodes (value 0 there). Binary dumps carry the header\n"
          "int64 nx, int64 ny, f64 hx, hy, ox, oy, then nx*ny row-major f64 values.\n";
    return os.str();
}

int emit_plots(RunManifest& manifest, const std::string& out_dir) {
    int count = 0;
    std::vector<FileRecord> existing = manifest.files;
    for (const auto& f : existing) {
        if (f.path.size() < 10 || f.path.substr(f.path.size() - 10) != "_curve.csv") continue;
        std::ifstream is(fs::path(out_dir) / f.path);
        if (!is) continue;
        std::string line, header;
        std::getline(is, line);  // schema comment
        std::getline(is, header);
        std::vector<std::string> cols;
        std::stringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
        if (cols.size() < 2) continue;

        std::string base = f.path.substr(0, f.path.size() - 4);
        std::ostringstream gp;
        gp << "# explab " << kVersion << " plot script for " << f.path << "\n";
        gp << "set datafile separator ','\n";
        gp << "set key outside\n";
        gp << "set xlabel '" << cols[0] << "'\n";
        gp << "set ylabel 'value'\n";
        gp << "plot ";
        for (std::size_t k = 1; k < cols.size(); ++k) {
            if (k > 1) gp << ", \\\n     ";
            gp << "'" << f.path << "' using 1:" << (k + 1) << " with linespoints title '"
               << cols[k] << "'";
        }
        gp << "\n";

        std::string rel = base + ".gp";
        fs::path full = fs::path(out_dir) / rel;
        std::string content = gp.str();
        {
            std::ofstream os(full, std::ios::binary);
            os.write(content.data(), (std::streamsize)content.size());
        }
        manifest.files.push_back({rel, (std::uint64_t)content.size(),
                                  hex64(fnv1a64(content.data(), content.size()))});
        ++count;
    }
    return count;
}

void write_manifest_json(const RunManifest& m, const std::string& out_dir) {
    nlohmann::ordered_json j;
    j["artifact_version"] = m.artifact_version;
    j["experiment"] = m.experiment;
    j["out_dir"] = m.out_dir;
    j["all_passed"] = m.all_passed();
    j["config"] = m.config_echo;
    j["tasks"] = nlohmann::ordered_json::array();
    for (const auto& t : m.tasks)
        j["tasks"].push_back({{"name", t.name},
                              {"status", t.status},
                              {"seconds", t.seconds},
                              {"message", t.message}});
    j["assertions"] = nlohmann::ordered_json::array();
    for (const auto& a : m.assertions)
        j["assertions"].push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : m.files)
        j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", f.digest}});
    std::ofstream os(fs::path(out_dir) / "manifest.json", std::ios::binary);
    os << j.dump(2) << "\n";
}

RunManifest run_experiment(const ExperimentConfig& cfg_in, const RunOptions& opts) {
    ExperimentConfig cfg = cfg_in;
    if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
    validate_config(cfg);

    RunManifest m;
    m.artifact_version = kVersion;
    m.experiment = cfg.experiment;
    m.out_dir = cfg.out_dir;
    m.config_echo = serialize_config(cfg);

    Workspace ws(cfg.out_dir, m);
    ws.write("config.echo.ini", m.config_echo);
    ws.write("SCHEMA.md", schema_md_text());

    try {
        if (cfg.experiment == "gelfand") experiment_gelfand(cfg, opts, ws, m);
        else if (cfg.experiment == "bounds") experiment_bounds(cfg, opts, ws, m);
        else if (cfg.experiment == "fig2") experiment_fig2(cfg, opts, ws, m);
        else if (cfg.experiment == "equidist") experiment_equidist(cfg, opts, ws, m);
        else if (cfg.experiment == "stratify") experiment_stratify(cfg, opts, ws, m);
        else if (cfg.experiment == "compressible") experiment_compressible(cfg, opts, ws, m);
        else if (cfg.experiment == "shear_growth") experiment_shear_growth(cfg, opts, ws, m);
    } catch (const std::exception& e) {
        m.tasks.push_back({cfg.experiment, "failed", 0.0, e.what()});
        std::printf("[FAIL] %s: %s\n", cfg.experiment.c_str(), e.what());
    }

    emit_plots(m, cfg.out_dir);
    write_manifest_json(m, cfg.out_dir);
    return m;
}

} // namespace explab
