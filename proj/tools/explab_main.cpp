// explab: explosion-threshold laboratory for advection-diffusion reaction
// problems in incompressible flows. One subcommand per experiment; every run
// writes versioned CSVs, gnuplot scripts, SCHEMA.md and a digest manifest.

#include <cstdio>
#include <fstream>

#include <CLI11.hpp>

#include "explab/experiments.hpp"
#include "explab/kernels.hpp"
#include "explab/version.hpp"

namespace {

std::vector<std::array<double, 2>> load_seeds(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open seed file: " + path);
    std::vector<std::array<double, 2>> seeds;
    double x, y;
    while (is >> x >> y) seeds.push_back({x, y});
    return seeds;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"explab - explosion thresholds in incompressible flows"};
    app.set_version_flag("--version", std::string("explab ") + explab::kVersion);

    std::string config_path, out_dir, seed_file;
    int jobs = 2;
    bool force_scalar = false;
    app.add_flag("--scalar-kernels", force_scalar,
                 "disable the SIMD kernel backend (use scalar reference)");

    const std::vector<std::string> experiments = {"gelfand",  "bounds",       "fig2",
                                                  "equidist", "stratify",     "compressible",
                                                  "shear_growth"};
    std::vector<CLI::App*> subs;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", config_path, "experiment config file (ini)");
        s->add_option("--out", out_dir, "output directory (overrides config)");
        s->add_option("--jobs", jobs, "worker threads for independent tasks")
            ->check(CLI::PositiveNumber);
        s->add_option("--seed-cells", seed_file, "file with cell seed points (x y per line)");
    };
    for (const auto& name : experiments) {
        CLI::App* s = app.add_subcommand(name, "run the " + name + " experiment");
        add_common(s);
        subs.push_back(s);
    }
    CLI::App* run_cmd = app.add_subcommand("run", "run the experiment named in --config");
    add_common(run_cmd);
    run_cmd->get_option("--config")->required();

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (force_scalar) explab::kern::select(explab::kern::Backend::scalar);

        explab::ExperimentConfig cfg;
        CLI::App* picked = app.get_subcommands().front();
        if (picked == run_cmd) {
            cfg = explab::load_config(config_path);
        } else {
            cfg = explab::default_config(picked->get_name());
            if (!config_path.empty()) {
                cfg = explab::load_config(config_path);
                cfg.experiment = picked->get_name();
            }
        }

        explab::RunOptions opts;
        opts.jobs = jobs;
        opts.out_override = out_dir;
        if (!seed_file.empty()) opts.seed_override = load_seeds(seed_file);

        std::printf("explab %s | experiment=%s | kernels=%s | jobs=%d\n", explab::kVersion,
                    cfg.experiment.c_str(), explab::kern::backend_name(), opts.jobs);
        explab::RunManifest m = explab::run_experiment(cfg, opts);
        bool ok = m.all_passed();
        std::printf("%s: %zu tasks, %zu assertions, %s\n", cfg.experiment.c_str(),
                    m.tasks.size(), m.assertions.size(), ok ? "ALL PASSED" : "FAILURES");
        return ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
