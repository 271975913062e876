#pragma once

// JSON experiment documents: parsing, schema checks and the typed view used
// by the command runners.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "leaky/geometry.hpp"
#include "leaky/wells.hpp"

namespace leaky {

using Json = nlohmann::json;

struct ThresholdSection {
    std::size_t n_cell = 32;
    std::size_t n_images = 0;
    double tail_tol = 1e-12;
    bool refine = true;
};

struct BandsSection {
    std::size_t n_theta = 17;
    std::size_t bands = 2;
    std::size_t n_cell = 32;
    double tail_tol = 1e-12;
    double kappa_floor = 0.05;
};

enum class Scenario { contraction, zero_mean, negative_mean };

struct BoundStateSection {
    std::optional<Scenario> scenario;
    double window_W = 0.0;
    std::size_t n = 0;
    std::size_t n_cell = 32;
    double margin_tol = 1e-6;
    bool refine = true;
    std::vector<double> mollifiers{8, 16, 32, 64, 128};
    std::size_t convexity_points = 201;
    std::size_t scan_points = 8;
};

struct SweepSection {
    std::size_t count = 0;
    long site_lo = -2;
    long site_hi = 2;
    /// Shift magnitudes as fractions of the spacing.
    double min_shift = 0.1;
    double max_shift = 0.3;
};

struct DiscriminantSection {
    double e_lo = 0.0;
    double e_hi = 0.0;
    std::size_t count = 0;
};

struct CouplingSection {
    CurveSpec curve;
    std::optional<CurveSpec> shifted;
    std::vector<double> alpha_list;
    double S_half = 0.0;
    std::size_t n = 0;
    std::size_t points_per_period = 64;
    double kappa_h = 0.1;
    std::size_t steps_per_period = 4000;
};

struct OnedSection {
    /// Absent for coupling-only documents.
    std::optional<WellArray1D> array;
    std::size_t steps_per_period = 400;
    std::size_t window_wells = 41;
    std::size_t n_per_a = 40;
    double bs_window_W = 0.0;
    std::size_t points_per_well = 16;
    bool richardson = true;
    std::optional<SweepSection> sweep;
    std::optional<DiscriminantSection> discriminant;
    std::optional<CouplingSection> coupling;
};

struct ExperimentConfig {
    std::optional<CurveSpec> curve;
    std::optional<double> alpha;
    ThresholdSection threshold;
    BandsSection bands;
    std::optional<BoundStateSection> bound_state;
    std::optional<OnedSection> oned;
    std::uint64_t seed = 0;
    /// SHA-256 of the canonical (sorted-key) serialization of the document.
    std::string hash;
    Json document;
};

/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::string& path);

CurveSpec parse_curve(const Json& j, const std::string& where = "curve");
Json curve_to_json(const CurveSpec& spec);

std::string sha256_hex(const std::string& data);

std::string to_string(Scenario s);

}  // namespace leaky
