#pragma once
// Configuration-driven experiment runner: wires grids, flows and the
// threshold/Freidlin engines into the named experiments, writes versioned
// CSVs plus a digest manifest, and emits gnuplot scripts for curve files.

#include <cstdint>
#include <string>
#include <vector>

#include "explab/config.hpp"

namespace explab {

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string hex64(std::uint64_t v);

struct FileRecord {
    std::string path;  // relative to the out dir
    std::uint64_t bytes = 0;
    std::string digest;  // fnv1a64 of the content
};

struct TaskRecord {
    std::string name;
    std::string status;  // ok | failed
    double seconds = 0.0;
    std::string message;
};

struct AssertionRecord {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunManifest {
    std::string artifact_version;
    std::string experiment;
    std::string out_dir;
    std::string config_echo;
    std::vector<TaskRecord> tasks;
    std::vector<AssertionRecord> assertions;
    std::vector<FileRecord> files;
    bool all_passed() const;
};

struct RunOptions {
    int jobs = 2;
    std::string out_override;
    std::vector<std::array<double, 2>> seed_override;  // --seed-cells
};

/// Dispatch to the named experiment; writes outputs + manifest.json +
/// SCHEMA.md + plot scripts under the config's out directory.
RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// One gnuplot script per *_curve.csv listed in the manifest; returns the
/// number of scripts written (idempotent bytes). Scripts land next to the CSVs.
int emit_plots(RunManifest& manifest, const std::string& out_dir);

void write_manifest_json(const RunManifest& manifest, const std::string& out_dir);

/// Generated documentation of every CSV schema this artifact writes.
std::string schema_md_text();

} // namespace explab
