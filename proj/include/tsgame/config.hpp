#pragma once

// Experiment configuration: an INI document with one section per module,
// validated against a fixed key set, with a canonical text form for hashing.

#include "tsgame/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsgame {

enum class Suite {
    RegretBaseline,
    LongHorizon,
    VsCe,
    VsBlind,
    DimSweep,
    PriorRobustness,
    AblationMu,
    AblationSigmaScale,
    AblationSigmaStructure,
    NashConvergence,
    Validate,
};

std::string to_string(Suite suite);
Suite parse_suite(const std::string& name);
/// Long-horizon and Nash-convergence runs; excluded from the default tests.
bool is_slow(Suite suite);
/// Suites whose aborted paths make the run fail (exit status 2).
bool is_strict(Suite suite);

/// Prior mean choices: zero, the true drift, or a constant fill.
enum class PriorMean { Zero, ATrue, Constant };

/// Prior covariance structures; the scale is s0 (Sigma0 = s0^2 I for
/// isotropic).
enum class PriorCov { Isotropic, Correlated, RankOne };

std::string to_string(PriorMean mean);
PriorMean parse_prior_mean(const std::string& name);
std::string to_string(PriorCov cov);
PriorCov parse_prior_cov(const std::string& name);

struct GameSection {
    std::size_t n_players = 10;
    std::size_t dim = 2;
    double a_diag = -0.5;
    double sigma_base = 0.5;
    double sigma_noise = 0.05;
    double epsilon = 0.05;
    /// epsilon is scaled by min(1, epsilon_reference_dim / d) so the
    /// diagonal-dominance condition stays satisfiable in high dimension
    double epsilon_reference_dim = 2.0;
    double xbar_scale = 1.0;
    double x0_offset = 0.5;
    std::size_t tracked_player = 3;
    std::uint64_t spec_seed = 20240601;
};

struct PriorSection {
    PriorMean mean = PriorMean::Zero;
    double mean_value = 0.3;          ///< fill value for PriorMean::Constant
    PriorCov cov = PriorCov::Isotropic;
    double scale = 0.1;               ///< s0
    double correlated_diag = 0.5;
    double correlated_offdiag = 0.1;
    double rank_one_scale = 0.2;      ///< Sigma0 = s0^2 I + r^2 v v^T
    PriorFamily family;
};

struct SimSection {
    double dt = 0.05;
    std::size_t steps = 5000;
    std::size_t paths = 30;
    std::uint64_t seed = 1;
    std::size_t record_every = 10;
    double abort_norm = 1e6;
};

struct PolicySection {
    double ce_cadence = 1.0;
};

/// Per-suite sweep lists; each suite reads only its own.
struct SuiteSection {
    std::vector<std::size_t> path_counts{10, 50, 100};
    std::vector<std::size_t> dims{2, 5, 10, 20};
    std::vector<std::string> families{"gaussian", "student_t", "exponential", "beta"};
    std::vector<std::string> mean_variants{"a_true", "zero", "constant"};
    std::vector<double> scales{0.1, 0.3, 1.0};
    std::vector<std::string> structures{"isotropic", "correlated", "rank_one"};
};

struct ExperimentConfig {
    Suite suite = Suite::RegretBaseline;
    GameSection game;
    PriorSection prior;
    SimSection sim;
    PolicySection policy;
    SuiteSection sweep;
    TruncationSet truncation;
    double band_scale = 0.2;

    // runtime options, not part of the canonical text
    std::filesystem::path out = "out";
    std::size_t threads = 1;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Suite-specific defaults (horizon, paths, prior variants), applied before
/// explicit keys.
void apply_suite_defaults(ExperimentConfig& cfg);

/// Parses and validates; throws ConfigError listing every problem. A suite
/// override replaces the file's suite (and its defaults) before keys apply.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>",
                              std::optional<Suite> suite_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Suite> suite_override = std::nullopt);

/// Constraint violations of an already-parsed config.
std::vector<std::string> check_config(const ExperimentConfig& cfg);

/// Canonical INI text: fixed section/key order, shortest round-trip numbers.
std::string canonical_text(const ExperimentConfig& cfg);

/// FNV-1a 64 over the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

/// Builds the instance: baseline randomization, then the configured prior.
GameSpec build_spec(const ExperimentConfig& cfg);

/// Prior (mu0, Sigma0) from the section for a given drift and dimension.
std::pair<Vec, Mat> build_prior(const PriorSection& prior, const Mat& a_true);

SimConfig sim_config(const ExperimentConfig& cfg);

}  // namespace tsgame
