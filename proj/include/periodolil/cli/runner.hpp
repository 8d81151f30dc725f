#pragma once

#include "periodolil/cli/config.hpp"
#include "periodolil/spectral.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace periodolil {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string config_hash;           // SHA-256 of the rendered config without its seed line
    std::string tool_version = kToolVersion;
    std::uint64_t master_seed = 0;
    std::string mode;
    double wall_time = 0.0;            // seconds
    std::map<std::string, std::string> checksums;  // file name → SHA-256

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

/// Hash of the rendered config with the seed line removed, so runs that differ
/// only by seed can be summarized together.
std::string config_hash(const ExperimentConfig& c);

/**
 * @brief Runs the configured pipeline and writes its outputs into `out_dir`.
 *
 * Outputs are staged in a sibling temporary directory and moved into place
 * only on success; on failure nothing is left behind. `out_dir` must not
 * exist or be empty. Files: config.ini, manifest.jsonl and per mode
 *   lil         lil.csv
 *   spectral    density.csv, sigma_t.csv (replicates ≥ 30)
 *   conditions  conditions.jsonl, terms_<id>[_<label>].csv
 *   martingale  martingale.csv, partest.csv
 *   transfer    invariant_density.csv, alpha.csv, transfer.jsonl
 */
RunManifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

RunManifest read_manifest(const std::filesystem::path& dir);

/// Reference f(t) for LIL comparisons, when the process has a closed form
/// (iid, linear, ARL with δ = 0).
std::optional<SpectralDensity> reference_density(const ProcessSpec& spec);

struct SummaryRow {
    Frequency t;
    std::size_t seeds = 0;
    double median = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::optional<double> reference;   // f(t), or 2f(π) at t = π
    std::optional<double> ratio;       // median / reference
};

/// Final running_max per (run, seed, t) aggregated per frequency. All runs
/// must share one config hash; mixing configs throws config_error.
std::vector<SummaryRow> summarize_runs(const std::vector<std::filesystem::path>& dirs,
                                       const std::optional<SpectralDensity>& reference);
/// As above, with the reference derived from the runs' own config.
std::vector<SummaryRow> summarize_runs(const std::vector<std::filesystem::path>& dirs);

/// `t,seeds,median,q10,q90,min,max,reference,ratio`.
std::string render_summary(const std::vector<SummaryRow>& rows);

}  // namespace periodolil
