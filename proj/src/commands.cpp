#include "leaky/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "leaky/errors.hpp"
#include "leaky/format.hpp"
#include "leaky/oned.hpp"
#include "leaky/spectral.hpp"

namespace leaky {
namespace {

void dump_into(std::ostringstream& os, const Json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                os << (first ? "" : ",\n") << pad << Json(k).dump() << ": ";
                dump_into(os, v, depth + 1);
                first = false;
            }
            os << "\n" << close << "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                os << (i ? ",\n" : "") << pad;
                dump_into(os, j[i], depth + 1);
            }
            os << "\n" << close << "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            os << (std::isfinite(v) ? fmt_double(v) : "null");
            return;
        }
        default:
            os << j.dump();
    }
}

Json header(const ExperimentConfig& cfg, const char* command) {
    Json j;
    j["command"] = command;
    j["config_hash"] = cfg.hash;
    return j;
}

const CurveSpec& require_curve(const ExperimentConfig& cfg) {
    if (!cfg.curve) {
        throw ConfigError("config: missing required key 'curve'");
    }
    return *cfg.curve;
}

double require_alpha(const ExperimentConfig& cfg) {
    if (!cfg.alpha) {
        throw ConfigError("config: missing required key 'alpha'");
    }
    return *cfg.alpha;
}

Json threshold_json(const Threshold& t) {
    return {{"kappa0", t.kappa0},          {"eps0", t.eps0},
            {"n_cell", t.n_cell},          {"n_images", t.n_images},
            {"tail_bound", t.tail_bound},  {"mu_at_root", t.mu_at_root}};
}

Json vec(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) {
        a.push_back(x);
    }
    return a;
}

Threshold threshold_for(const ExperimentConfig& cfg, const CurveSpec& periodic, double alpha) {
    ThresholdOptions to;
    to.n_cell = cfg.threshold.n_cell;
    to.n_images = cfg.threshold.n_images;
    to.tail_tol = cfg.threshold.tail_tol;
    return find_threshold(periodic, alpha, to);
}

// Least-squares slope of log|g(n_k) - g(n_{k+1})| against log n_k.
std::optional<double> decay_exponent(const std::vector<double>& n, const std::vector<double>& gap) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k + 1 < gap.size(); ++k) {
        const double d = std::abs(gap[k] - gap[k + 1]);
        if (d > 0.0) {
            xs.push_back(std::log(n[k]));
            ys.push_back(std::log(d));
        }
    }
    if (xs.size() < 2) {
        return std::nullopt;
    }
    const auto m = static_cast<double>(xs.size());
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - sx / m) * (ys[i] - sy / m);
        sxx += (xs[i] - sx / m) * (xs[i] - sx / m);
    }
    return sxy / sxx;
}

Json bound_json(const BoundStateResult& r) {
    Json j;
    j["status"] = to_string(r.status);
    j["found"] = r.found();
    j["margin"] = r.margin;
    j["window_W"] = r.window_W;
    j["n"] = r.n;
    j["kappa0"] = r.kappa0;
    j["eps0"] = r.eps0;
    Json refinements = Json::array();
    for (const auto& s : r.refinements) {
        refinements.push_back({{"window_W", s.window_W},
                               {"n", s.n},
                               {"mu_reference", s.mu_reference},
                               {"mu_perturbed", s.mu_perturbed},
                               {"margin", s.margin}});
    }
    Json diag;
    diag["mu_reference"] = r.mu_reference;
    diag["mu_perturbed"] = r.mu_perturbed;
    diag["refinements"] = refinements;
    if (r.found()) {
        j["kappa_star"] = r.kappa_star;
        j["energy"] = r.energy;
        j["depth"] = r.depth;
        diag["crossing"] = r.crossing;
        diag["target"] = r.target;
        diag["mu_at_kappa_star"] = r.mu_at_kappa_star;
        diag["scan_kappa"] = vec(r.scan_kappa);
        diag["scan_mu"] = vec(r.scan_mu);
        diag["step"] = r.step;
    } else {
        j["kappa_star"] = nullptr;
        j["energy"] = nullptr;
    }
    j["diagnostics"] = diag;
    return j;
}

void check_scenario(Scenario s, const CurveSpec& spec) {
    const std::string where = "config.bound_state.scenario";
    const double integral = geometry::tau_prime_integral(spec);
    switch (s) {
        case Scenario::contraction:
            for (const auto& t : spec.tau.terms) {
                if (!std::holds_alternative<SmoothContraction>(t)) {
                    throw ConfigError(where + ": contraction needs tau made of smooth_contraction terms only");
                }
            }
            return;
        case Scenario::zero_mean:
            if (!spec.epsilon_scale) {
                throw ConfigError(where + ": zero_mean needs curve.epsilon_scale");
            }
            if (std::abs(integral) > 1e-12) {
                throw ConfigError(where + ": zero_mean needs the integral of tau' to vanish, got " +
                                  fmt_double(integral));
            }
            return;
        case Scenario::negative_mean: {
            if (!spec.epsilon_scale) {
                throw ConfigError(where + ": negative_mean needs curve.epsilon_scale");
            }
            if (!(integral < 0.0)) {
                throw ConfigError(where + ": negative_mean needs a negative integral of tau', got " +
                                  fmt_double(integral));
            }
            const bool has_wiggle = std::any_of(spec.tau.terms.begin(), spec.tau.terms.end(), [](const auto& t) {
                return std::holds_alternative<ZeroMeanWiggle>(t);
            });
            if (!has_wiggle) {
                throw ConfigError(where + ": negative_mean needs a zero_mean_wiggle term to compare against");
            }
            return;
        }
    }
}

Json convexity_scan(const CurveSpec& spec, double kappa0, std::size_t points) {
    const auto support = geometry::tau_support(spec);
    Json j;
    if (!support || points == 0) {
        j["points"] = 0;
        return j;
    }
    const double lo = support->first;
    const double hi = support->second;
    const double h = (hi - lo) / static_cast<double>(points);
    double min_margin = std::numeric_limits<double>::infinity();
    double min_sufficient = std::numeric_limits<double>::infinity();
    double at = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;
    Json xs = Json::array();
    Json ms = Json::array();
    for (std::size_t i = 0; i < points; ++i) {
        const double x = lo + (static_cast<double>(i) + 0.5) * h;
        try {
            const auto c = geometry::convexity_margin(spec, x, kappa0);
            xs.push_back(x);
            ms.push_back(c.margin);
            if (c.margin < min_margin) {
                min_margin = c.margin;
                at = x;
            }
            min_sufficient = std::min(min_sufficient, c.sufficient_margin);
            ++used;
        } catch (const NumericalError&) {
            ++skipped;
        }
    }
    j["points"] = used;
    j["skipped"] = skipped;
    j["min_margin"] = min_margin;
    j["argmin"] = at;
    j["min_sufficient_margin"] = min_sufficient;
    j["all_positive"] = used > 0 && min_margin > 0.0;
    j["x"] = xs;
    j["margin"] = ms;
    return j;
}

// Uniform [0, 1) from the top 53 bits; std distributions are not portable across libraries.
double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Json array_json(const WellArray1D& arr) {
    Json shifts = Json::array();
    for (const auto& [site, shift] : arr.shifts) {
        if (shift != 0.0) {
            shifts.push_back({{"site", site}, {"shift", shift}});
        }
    }
    return shifts;
}

void oned_array(const ExperimentConfig& cfg, const OnedSection& o, Json& j, CommandResult& out) {
    const WellArray1D& arr0 = *o.array;
    const WellArray1D periodic = arr0.unshifted();
    const BandEdge edge = band_bottom_1d(periodic, o.steps_per_period);

    j["spacing"] = arr0.spacing;
    j["shifts"] = array_json(arr0);
    j["band_bottom"] = {{"eps0", edge.eps0},
                        {"trace_at_edge", edge.trace_at_edge},
                        {"det_at_edge", edge.det_at_edge},
                        {"steps_per_period", edge.steps_per_period}};
    j["resolution"] = {{"window_wells", o.window_wells},
                       {"n_per_a", o.n_per_a},
                       {"bs_window_W", o.bs_window_W},
                       {"points_per_well", o.points_per_well},
                       {"richardson", o.richardson}};

    const double tol = 1e-6;
    auto evaluate = [&](const WellArray1D& arr) {
        Json c;
        const GroundState1D g = ground_state_1d(arr, o.window_wells, o.n_per_a);
        c["ground"] = g.richardson;
        c["ground_fine"] = g.energy;
        c["ground_coarse"] = g.coarse;
        c["below_band"] = g.richardson < edge.eps0 - tol;
        if (arr.is_periodic()) {
            c["gap_to_band"] = std::abs(g.richardson - edge.eps0);
            return c;
        }
        if (o.bs_window_W > 0.0 && edge.eps0 < 0.0) {
            OnedBoundOptions bo;
            bo.window_W = o.bs_window_W;
            bo.points_per_well = o.points_per_well;
            bo.richardson = o.richardson;
            const OnedBoundResult b = bound_below_band_bs(arr, std::sqrt(-edge.eps0), bo);
            Json bj;
            bj["mu_reference"] = b.mu_reference;
            bj["mu_at_kappa0"] = b.mu_at_kappa0;
            bj["margin"] = b.margin;
            bj["crossing"] = b.crossing;
            bj["kappa_star"] = b.kappa_star ? Json(*b.kappa_star) : Json(nullptr);
            bj["energy"] = b.energy ? Json(*b.energy) : Json(nullptr);
            bj["energy_fine"] = b.energy_fine ? Json(*b.energy_fine) : Json(nullptr);
            bj["energy_extrapolated"] = b.energy_extrapolated ? Json(*b.energy_extrapolated) : Json(nullptr);
            if (const auto e = b.best_energy()) {
                const double rel = std::abs(*e - g.richardson) / std::abs(g.richardson);
                bj["relative_difference"] = rel;
                bj["agrees"] = rel < 1e-4;
            } else {
                bj["agrees"] = false;
            }
            c["bs"] = bj;
        }
        const auto w = convexity_witness(arr, std::sqrt(std::max(-edge.eps0, 1e-12)));
        c["convexity_witness_min"] = *std::min_element(w.begin(), w.end());
        return c;
    };
    j["array"] = evaluate(arr0);
    bool all_below = true;
    bool all_agree = true;

    if (o.sweep) {
        std::mt19937_64 rng(cfg.seed);
        Json cases = Json::array();
        for (std::size_t k = 0; k < o.sweep->count; ++k) {
            const WellArray1D arr = random_shift_set(arr0, *o.sweep, rng);
            Json c = evaluate(arr);
            c["shifts"] = array_json(arr);
            all_below = all_below && c["below_band"].get<bool>();
            if (c.contains("bs")) {
                all_agree = all_agree && c["bs"]["agrees"].get<bool>();
            }
            cases.push_back(c);
        }
        j["random_sweep"] = {{"seed", cfg.seed}, {"count", o.sweep->count}, {"cases", cases},
                             {"all_below_band", all_below}, {"all_agree", all_agree}};
    }

    if (o.discriminant) {
        const auto& d = *o.discriminant;
        out.files.push_back(
            {"discriminant.csv", discriminant_csv(periodic, d.e_lo, d.e_hi, d.count, o.steps_per_period)});
        j["discriminant_csv"] = "discriminant.csv";
    }
    out.summary = "oned: eps0=" + fmt_double(edge.eps0) +
                  (o.sweep ? std::string(" sweep below_band=") + (all_below ? "all" : "not all") : "");
}

}  // namespace

std::string dump_record(const Json& j) {
    std::ostringstream os;
    dump_into(os, j, 0);
    os << "\n";
    return os.str();
}

WellArray1D random_shift_set(const WellArray1D& base, const SweepSection& sweep, std::mt19937_64& rng) {
    constexpr int kAttempts = 10000;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        WellArray1D arr = base.unshifted();
        bool any = false;
        for (long site = sweep.site_lo; site <= sweep.site_hi; ++site) {
            const bool pick = unit(rng) < 0.5;
            const double mag = sweep.min_shift + (sweep.max_shift - sweep.min_shift) * unit(rng);
            const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
            if (pick && mag > 0.0) {
                arr.shifts[site] = sign * mag * arr.spacing;
                any = true;
            }
        }
        if (!any) {
            continue;
        }
        try {
            validate(arr);
            return arr;
        } catch (const ModelError&) {
        }
    }
    throw ConfigError("config.oned.random_sweep: no admissible shift set found; narrow the shift range");
}

CommandResult run_threshold(const ExperimentConfig& cfg) {
    const CurveSpec& spec = require_curve(cfg);
    const double alpha = require_alpha(cfg);
    const CurveSpec periodic = spec.unperturbed();
    const Threshold t = threshold_for(cfg, periodic, alpha);
    Json j = header(cfg, "threshold");
    j["alpha"] = alpha;
    j["tau_removed"] = !spec.tau.is_zero();
    j["kappa0"] = t.kappa0;
    j["eps0"] = t.eps0;
    j["resolution"] = threshold_json(t);
    if (cfg.threshold.refine) {
        ThresholdOptions fine;
        fine.n_cell = 2 * t.n_cell;
        fine.n_images = 2 * t.n_images;
        fine.tail_tol = cfg.threshold.tail_tol;
        const Threshold r = find_threshold(periodic, alpha, fine);
        Json ref = threshold_json(r);
        ref["relative_change"] = std::abs(r.eps0 - t.eps0) / std::abs(r.eps0);
        j["refinement"] = ref;
    }
    CommandResult out;
    out.files.push_back({"threshold.json", dump_record(j)});
    out.summary = "threshold: kappa0=" + fmt_double(t.kappa0) + " eps0=" + fmt_double(t.eps0);
    return out;
}

CommandResult run_bands(const ExperimentConfig& cfg) {
    const CurveSpec& spec = require_curve(cfg);
    const double alpha = require_alpha(cfg);
    BandOptions bo;
    bo.n_theta = cfg.bands.n_theta;
    bo.bands = cfg.bands.bands;
    bo.n_cell = cfg.bands.n_cell;
    bo.tail_tol = cfg.bands.tail_tol;
    bo.kappa_floor = cfg.bands.kappa_floor;
    const BandStructure b = band_structure(spec.unperturbed(), alpha, bo);
    std::size_t failed = 0;
    for (const auto& s : b.status) {
        failed += s == "ok" ? 0 : 1;
    }
    if (failed == b.status.size()) {
        throw NumericalError("bands: every theta failed: " + b.status.front());
    }
    Json j = header(cfg, "bands");
    j["alpha"] = alpha;
    j["period"] = b.period;
    j["n_cell"] = b.n_cell;
    j["n_theta"] = b.theta.size();
    j["bands_requested"] = bo.bands;
    j["kappa_floor"] = bo.kappa_floor;
    j["csv"] = "bands.csv";
    Json rows = Json::array();
    for (std::size_t t = 0; t < b.theta.size(); ++t) {
        rows.push_back({{"theta", b.theta[t]}, {"bands_found", b.energies[t].size()}, {"status", b.status[t]}});
    }
    j["per_theta"] = rows;
    Json ranges = Json::array();
    for (std::size_t k = 0; k < bo.bands; ++k) {
        const double lo = b.band_min(k);
        if (std::isfinite(lo)) {
            ranges.push_back({{"band", k}, {"min", lo}, {"max", b.band_max(k)}});
        }
    }
    j["band_ranges"] = ranges;
    CommandResult out;
    out.files.push_back({"bands.csv", band_csv(b)});
    out.files.push_back({"bands.json", dump_record(j)});
    out.summary = "bands: " + std::to_string(b.theta.size()) + " theta values, " + std::to_string(failed) + " failed";
    return out;
}

CommandResult run_bound_state(const ExperimentConfig& cfg) {
    const CurveSpec& spec = require_curve(cfg);
    const double alpha = require_alpha(cfg);
    if (!cfg.bound_state) {
        throw ConfigError("config: missing required key 'bound_state'");
    }
    const BoundStateSection& bs = *cfg.bound_state;
    if (spec.tau.is_zero()) {
        throw ConfigError("config.curve.tau: bound-state needs a nonzero deformation");
    }
    if (bs.scenario) {
        check_scenario(*bs.scenario, spec);
    }
    ThresholdOptions to;
    to.n_cell = bs.n_cell;
    to.tail_tol = cfg.threshold.tail_tol;
    const CurveSpec periodic = spec.unperturbed();
    const Threshold t = find_threshold(periodic, alpha, to);

    BoundStateOptions bo;
    bo.window_W = bs.window_W;
    bo.n = bs.n;
    bo.margin_tol = bs.margin_tol;
    bo.refine = bs.refine;
    bo.scan_points = bs.scan_points;

    Json j = header(cfg, "bound-state");
    j["alpha"] = alpha;
    j["scenario"] = bs.scenario ? to_string(*bs.scenario) : "custom";
    j["threshold"] = threshold_json(t);
    j["tau_prime_integral"] = geometry::tau_prime_integral(spec);

    std::optional<BoundStateResult> dominating;
    if (bs.scenario == Scenario::negative_mean) {
        CurveSpec dom = spec;
        dom.tau.terms.clear();
        for (const auto& term : spec.tau.terms) {
            if (std::holds_alternative<ZeroMeanWiggle>(term)) {
                dom.tau.terms.push_back(term);
            }
        }
        dominating = find_bound_state(dom, alpha, t.kappa0, bo);
        if (dominating->found()) {
            bo.target = dominating->target;
        }
    }

    const BoundStateResult r = find_bound_state(spec, alpha, t.kappa0, bo);
    Json rec = bound_json(r);
    for (auto& [k, v] : rec.items()) {
        j[k] = v;
    }

    Json trial;
    TrialOptions tr;
    tr.window_W = bs.window_W;
    tr.n = bs.n;
    tr.n_cell = bs.n_cell;
    tr.tail_tol = cfg.threshold.tail_tol;
    std::vector<double> gaps;
    for (double m : bs.mollifiers) {
        gaps.push_back(trial_function_gap(spec, periodic, alpha, t.kappa0, m, tr));
    }
    trial["mollifiers"] = vec(bs.mollifiers);
    trial["gap"] = vec(gaps);
    trial["all_positive"] = std::all_of(gaps.begin(), gaps.end(), [](double g) { return g > 0.0; });
    if (const auto e = decay_exponent(bs.mollifiers, gaps)) {
        trial["decay_exponent"] = *e;
    } else {
        trial["decay_exponent"] = nullptr;
    }
    j["trial_gap"] = trial;

    if (spec.epsilon_scale) {
        j["convexity"] = convexity_scan(spec, t.kappa0, bs.convexity_points);
    }
    if (dominating) {
        Json d = bound_json(*dominating);
        d.erase("diagnostics");
        j["dominating"] = d;
        j["dominates"] = r.found() && dominating->found() && r.kappa_star >= dominating->kappa_star;
    }

    CommandResult out;
    out.files.push_back({"bound_state.json", dump_record(j)});
    if (r.found()) {
        std::string csv = "x,phi\n";
        for (std::size_t i = 0; i < r.grid.size(); ++i) {
            csv += fmt_double(r.grid[i]) + "," + fmt_double(r.eigenvector[i]) + "\n";
        }
        out.files.push_back({"bound_state_eigenvector.csv", csv});
    }
    out.summary = "bound-state: " + to_string(r.status) + " margin=" + fmt_double(r.margin) +
                  (r.found() ? " kappa*=" + fmt_double(r.kappa_star) : "");
    return out;
}

CommandResult run_oned(const ExperimentConfig& cfg) {
    if (!cfg.oned) {
        throw ConfigError("config: missing required key 'oned'");
    }
    const OnedSection& o = *cfg.oned;
    if (!o.array && (o.sweep || o.discriminant || o.bs_window_W > 0.0)) {
        throw ConfigError("config.oned: random_sweep, discriminant and bs need 'spacing' and 'well'");
    }
    Json j = header(cfg, "oned");
    CommandResult out;
    const double tol = 1e-6;
    if (o.array) {
        oned_array(cfg, o, j, out);
    }
    if (o.coupling) {
        const CouplingSection& c = *o.coupling;
        CouplingOptions co;
        co.kappa_h = c.kappa_h;
        co.steps_per_period = c.steps_per_period;
        const auto rows = strong_coupling_compare(c.curve, c.alpha_list, co);
        out.files.push_back({"coupling.csv", coupling_csv(rows)});
        Json cj;
        cj["csv"] = "coupling.csv";
        Json n_cells = Json::array();
        for (const auto& r : rows) {
            n_cells.push_back(r.n_cell);
        }
        cj["n_cell"] = n_cells;
        const std::size_t m = rows.size();
        cj["delta_decreases"] = m >= 2 && rows.back().delta < rows.front().delta;
        cj["ratio_nonincreasing_top"] = m >= 2 && rows[m - 1].ratio <= rows[m - 2].ratio;
        if (c.shifted) {
            const double alpha = c.alpha_list.front();
            EffectiveOptions eo;
            eo.S_half = c.S_half;
            eo.n = c.n;
            eo.points_per_period = c.points_per_period;
            const double band = band_bottom_1d(curvature_wells(c.curve), c.steps_per_period).eps0;
            const EffectiveSpectrum plain = effective_spectrum(c.curve.unperturbed(), alpha, eo);
            const EffectiveSpectrum moved = effective_spectrum(*c.shifted, alpha, eo);
            const double shift = 0.25 * alpha * alpha;
            Json sj;
            sj["alpha"] = alpha;
            sj["band_bottom"] = band;
            sj["unshifted_lowest"] = plain.levels.empty() ? Json(nullptr) : Json(plain.levels.front() + shift);
            sj["shifted_lowest"] = moved.levels.empty() ? Json(nullptr) : Json(moved.levels.front() + shift);
            sj["below_band"] = !moved.levels.empty() && moved.levels.front() + shift < band - tol;
            cj["shifted"] = sj;
        }
        j["strong_coupling"] = cj;
    }
    out.files.insert(out.files.begin(), {"oned.json", dump_record(j)});
    if (out.summary.empty()) {
        out.summary = "oned: strong coupling only";
    }
    return out;
}

}  // namespace leaky
