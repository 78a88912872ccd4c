#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pointerlab/models.hpp"

// Scenario-driven front end: parse a config file, run the requested analyses,
// and write machine-readable outputs (CSV trajectories, stanza reports) with
// 17-significant-digit floats. Outputs are byte-identical for a fixed config
// and seed, regardless of thread count.
namespace pointerlab::cli {

struct GridSpec {
    double t_max = 0.0;
    int points = 0;
    std::string units = "absolute";  // "absolute" | "1/g"
};

struct EnvInitialSpec {
    std::string kind;                 // "coherent" | "fock" | "per-spin"
    int fock_n = 0;
    std::optional<Complex> nu;        // coherent amplitude override
    std::vector<std::array<Complex, 2>> amplitudes;  // per-spin; empty = default
};

struct CouplingSpec {
    std::string kind;                 // "gaussian" | "explicit"
    int count = 0;
    double mean = 0.0;
    double sigma = 0.0;
    std::vector<double> values;
};

struct CustomSpec {
    Matrix h_sys;    // 2x2
    Matrix h_env;    // D x D
    Matrix h_prime;  // 2D x 2D
};

struct Tolerances {
    std::optional<double> scalar_tol;  // default: 5/sqrt(nbar) for jcm, 1e-6 otherwise
    double theorem_tol = 1e-8;
    double settle_tol = 0.02;
    double window_fraction = 0.25;
    double polarization_floor = 0.05;
    double angle_tol_deg = 2.0;
    double weight_floor = 1e-8;
    double dedup_angle_deg = 1.0;
    double leakage_tol = 1e-6;
};

struct ScanSpec {
    int resolution = 32;
    int top_k = 8;
};

struct ScenarioConfig {
    std::string model;  // "jcm" | "sbm" | "spin-spin" | "custom-hamiltonian"
    models::JCMParams jcm;
    models::SBMParams sbm;
    double spin_delta0 = 0.0;
    CouplingSpec couplings;
    std::vector<std::array<Complex, 2>> spin_env_amplitudes;
    std::optional<CustomSpec> custom;

    EnvInitialSpec env_initial;
    std::optional<std::pair<double, double>> system_initial;  // (theta, chi)
    GridSpec grid;
    std::vector<std::string> analyses;
    Tolerances tol;
    ScanSpec scan;
    std::optional<std::uint64_t> seed;
    int threads = 1;

    double scalar_tolerance() const;
};

// Parse and validate; unknown keys anywhere are hard errors (ConfigError).
ScenarioConfig load_config(const std::filesystem::path& path);

// Execute the configured analyses and write their files into out_dir.
// Throws ConfigError for semantic config problems and TruncationError /
// NumericError / PointerBrokenError for numeric failures.
void run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

// Full command-line entry point (subcommands: simulate, find-pointers,
// check-theorems, bloch, report). Returns the process exit code:
// 0 success, 2 validation error, 3 numeric failure.
int cli_main(int argc, const char* const* argv);

// 17 significant digits, C locale.
std::string format17(double value);

}  // namespace pointerlab::cli
