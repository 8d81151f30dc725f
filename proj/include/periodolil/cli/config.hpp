#pragma once

#include "periodolil/core.hpp"
#include "periodolil/processes.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace periodolil {

/// Malformed or inconsistent experiment configuration (exit status 2).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode { lil, spectral, conditions, martingale, transfer };

std::string to_string(Mode m);
Mode parse_mode(std::string_view text);

/**
 * @brief One experiment: a process, the frequencies to probe, and the
 * mode-specific knobs.
 *
 * Text form (sections and keys in this order, `#` starts a comment line):
 *
 *     [process]
 *     kind = linear
 *     coeffs = geometric(0.5, 27)
 *     innovation = gaussian(1)
 *     [experiment]
 *     mode = lil
 *     frequencies = 2/3 pi, 1 pi
 *     ...
 *     [output]
 *     dir = runs/ar1
 *
 * Frequencies are exact: `p/q pi`, `p pi`, `pi` or `grid(j, n)` (2πj/n).
 */
struct ExperimentConfig {
    ProcessSpec process = IidSpec{InnovationDist::gaussian(1.0)};
    Mode mode = Mode::lil;
    std::vector<Frequency> frequencies;
    bool include_zero = false;
    CheckpointSchedule schedule = dyadic_checkpoints(4, 10);
    std::uint64_t replicates = 1;
    std::uint64_t master_seed = 0;
    std::int64_t n = 4096;             // window length (spectral, martingale)
    std::int64_t half_width = 0;       // smoothed periodogram; 0 selects ⌊n^0.4⌋
    std::int64_t fejer_order = 512;
    std::int64_t k_max = 1000;         // series conditions
    std::int64_t grid = 16384;         // transfer-operator grid
    std::int64_t iterations = 200;     // power iterations for the invariant density
    std::vector<std::int64_t> alpha_lags{4, 8, 16};
    std::string output_dir = "run";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the text form; throws config_error with a line number on failure.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
/// Canonical text form; parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& c);
/// Semantic checks beyond syntax (replicates ≥ 1, zero frequency opt-in, mode/process fit).
void validate_config(const ExperimentConfig& c);

std::string render_frequency(const Frequency& t);
Frequency parse_frequency(std::string_view text);
std::string render_process(const ProcessSpec& spec);

}  // namespace periodolil
