#pragma once

// Experiment suites: each expands into one or more arms (policy and
// instance variants), runs them and writes CSV, SVG and a manifest.

#include "tsgame/config.hpp"
#include "tsgame/metrics.hpp"
#include "tsgame/output.hpp"
#include "tsgame/validation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsgame {

/// One simulated variant within a suite.
struct Arm {
    std::string label;
    GameSpec spec;
    PolicyConfig policy;
    SimConfig sim;
    bool coupled = false;
};

struct ArmRun {
    Arm arm;
    EquilibriumSolution eq_true;
    std::vector<RunRecord> records;

    std::vector<const RunRecord*> completed() const;
    std::size_t aborted() const;
};

ArmRun run_arm(const Arm& arm);

/// Per-path regret series of the tracked player over completed paths.
struct ArmSeries {
    Vec times;
    std::vector<Vec> cumulative;
    std::vector<Vec> normalized;
    std::vector<Vec> dim_normalized;
};

ArmSeries arm_series(const ArmRun& run);

/// Arms a suite expands into (empty for validate).
std::vector<Arm> suite_arms(const ExperimentConfig& cfg);

struct SuiteResult {
    std::vector<std::filesystem::path> files;
    std::size_t aborted = 0;
    std::size_t failed_checks = 0;
    bool strict = false;
};

/// Runs the configured suite into cfg.out.
SuiteResult run_suite(const ExperimentConfig& cfg);

/// Aggregated regret table: mean/std/lower/upper of R, R/sqrt(t log t) and
/// R/(d sqrt(t log t)).
CsvTable regret_table(const ArmSeries& s, double band_scale);

}  // namespace tsgame
