#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "asclt/config.hpp"

namespace asclt::experiments {

using config::json;

struct Assertion {
    std::string statistic;
    double value = 0.0;
    double tolerance = 0.0;
    std::string relation;  // "<=", ">=", "<"
    bool pass = false;
};

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RunResult {
    json resolved_config;
    std::string hash;
    double runtime_seconds = 0.0;
    std::vector<Assertion> assertions;
    std::vector<Table> tables;

    bool pass() const {
        for (const auto& a : assertions)
            if (!a.pass) return false;
        return true;
    }
};

/// Executes one experiment config end to end (validation included).
RunResult run_experiment(json config, int threads);

/// Writes config.json, summary.json and one CSV per table under
/// out_dir/<name>/; every file embeds the config hash.
void write_bundle(const RunResult& result, const std::filesystem::path& out_dir);

/// Consolidates summary.json bundles under dir into a text table plus
/// report.csv; returns the exit code (0 iff everything passed and all
/// hashes matched).
int report(const std::filesystem::path& dir, std::ostream& out);

}  // namespace asclt::experiments

namespace asclt::presets {

/// Built-in experiment presets, one per acceptance scenario.
std::vector<std::pair<std::string, experiments::json>> all();

/// Preset by name; throws std::out_of_range when unknown.
experiments::json by_name(const std::string& name);

}  // namespace asclt::presets
