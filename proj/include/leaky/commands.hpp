#pragma once

// Subcommand runners. Each returns the files to write; nothing touches disk here.

#include <random>
#include <string>
#include <vector>

#include "leaky/config.hpp"

namespace leaky {

struct Artifact {
    std::string name;
    std::string content;
};

struct CommandResult {
    std::vector<Artifact> files;
    /// One-line human summary for stdout.
    std::string summary;
};

CommandResult run_threshold(const ExperimentConfig& cfg);
CommandResult run_bands(const ExperimentConfig& cfg);
CommandResult run_bound_state(const ExperimentConfig& cfg);
CommandResult run_oned(const ExperimentConfig& cfg);

/// Pretty JSON with sorted keys, floats at 17 significant digits, non-finite as null.
std::string dump_record(const Json& j);

/// Admissible random shift set: sites in [site_lo, site_hi], each shifted with
/// probability 1/2 by a magnitude in [min_shift, max_shift] * spacing, at least one site.
WellArray1D random_shift_set(const WellArray1D& base, const SweepSection& sweep, std::mt19937_64& rng);

}  // namespace leaky
