#include "leaky/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "leaky/errors.hpp"
#include "leaky/overloaded.hpp"

namespace leaky {
namespace {

// Typed, key-checked view of one JSON object.
class Section {
public:
    Section(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) {
            throw ConfigError(where_ + ": expected an object");
        }
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : j_.items()) {
            if (ok.count(k) == 0) {
                throw ConfigError(where_ + ": unknown key '" + k + "'");
            }
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const Json& raw(const char* key) const {
        if (!j_.contains(key)) {
            throw ConfigError(path(key) + ": missing required key '" + key + "'");
        }
        return j_.at(key);
    }
    std::string path(const char* key) const { return where_ + "." + key; }

    double number(const char* key) const {
        const Json& v = raw(key);
        if (!v.is_number()) {
            throw ConfigError(path(key) + ": expected a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            throw ConfigError(path(key) + ": must be finite");
        }
        return d;
    }
    double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
    double positive(const char* key) const {
        const double d = number(key);
        if (!(d > 0.0)) {
            throw ConfigError(path(key) + ": must be positive");
        }
        return d;
    }
    double positive_or(const char* key, double fallback) const { return has(key) ? positive(key) : fallback; }

    std::size_t count(const char* key) const {
        const Json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError(path(key) + ": expected a nonnegative integer");
        }
        return v.get<std::size_t>();
    }
    std::size_t count_or(const char* key, std::size_t fallback) const { return has(key) ? count(key) : fallback; }
    long integer(const char* key) const {
        const Json& v = raw(key);
        if (!v.is_number_integer()) {
            throw ConfigError(path(key) + ": expected an integer");
        }
        return v.get<long>();
    }
    bool flag_or(const char* key, bool fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const Json& v = raw(key);
        if (!v.is_boolean()) {
            throw ConfigError(path(key) + ": expected true or false");
        }
        return v.get<bool>();
    }
    std::string text(const char* key) const {
        const Json& v = raw(key);
        if (!v.is_string()) {
            throw ConfigError(path(key) + ": expected a string");
        }
        return v.get<std::string>();
    }
    std::vector<double> numbers(const char* key) const {
        const Json& v = raw(key);
        if (!v.is_array() || v.empty()) {
            throw ConfigError(path(key) + ": expected a nonempty array of numbers");
        }
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) {
                throw ConfigError(path(key) + ": expected numbers only");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }
    Section child(const char* key) const { return Section(raw(key), path(key)); }

private:
    const Json& j_;
    std::string where_;
};

Profile parse_profile(const Section& s) {
    s.allow({"kind", "params"});
    const std::string kind = s.text("kind");
    if (kind == "flat") {
        if (s.has("params")) {
            s.child("params").allow({});
        }
        return FlatProfile{};
    }
    const Section p = s.child("params");
    if (kind == "sine") {
        p.allow({"amplitude"});
        return SineProfile{p.number("amplitude")};
    }
    if (kind == "bump_train") {
        p.allow({"amplitude", "half_width", "order"});
        BumpTrainProfile b{p.number("amplitude"), p.positive("half_width"), 6};
        if (p.has("order")) {
            b.order = static_cast<int>(p.integer("order"));
        }
        return b;
    }
    throw ConfigError(s.path("kind") + ": unknown profile '" + kind + "' (flat, sine, bump_train)");
}

void parse_terms(const Section& s, std::vector<DeformationTerm>& out) {
    s.allow({"kind", "params"});
    const std::string kind = s.text("kind");
    if (kind == "zero") {
        return;
    }
    const Section p = s.child("params");
    if (kind == "smooth_contraction") {
        p.allow({"depth", "half_width"});
        out.emplace_back(SmoothContraction{p.positive("depth"), p.positive("half_width")});
    } else if (kind == "zero_mean_wiggle") {
        p.allow({"amplitude", "half_width"});
        out.emplace_back(ZeroMeanWiggle{p.number("amplitude"), p.positive("half_width")});
    } else if (kind == "step_shifts") {
        p.allow({"steps"});
        const Json& steps = p.raw("steps");
        if (!steps.is_array() || steps.empty()) {
            throw ConfigError(p.path("steps") + ": expected a nonempty array");
        }
        StepShifts st;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const Section e(steps[i], p.path("steps") + "[" + std::to_string(i) + "]");
            e.allow({"lo", "hi", "shift"});
            st.steps.push_back({e.number("lo"), e.number("hi"), e.number("shift")});
        }
        out.emplace_back(std::move(st));
    } else if (kind == "sum") {
        p.allow({"terms"});
        const Json& terms = p.raw("terms");
        if (!terms.is_array()) {
            throw ConfigError(p.path("terms") + ": expected an array");
        }
        for (std::size_t i = 0; i < terms.size(); ++i) {
            parse_terms(Section(terms[i], p.path("terms") + "[" + std::to_string(i) + "]"), out);
        }
    } else {
        throw ConfigError(s.path("kind") + ": unknown deformation '" + kind +
                          "' (zero, smooth_contraction, zero_mean_wiggle, step_shifts, sum)");
    }
}

WellArray1D parse_array(const Section& s) {
    WellArray1D arr;
    arr.spacing = s.positive("spacing");
    const Section w = s.child("well");
    w.allow({"shape", "depth", "width", "order", "samples"});
    const std::string shape = w.text("shape");
    arr.well.width = w.positive("width");
    if (shape == "square" || shape == "smooth_bump") {
        arr.well.shape = shape == "square" ? WellShape::square : WellShape::smooth_bump;
        arr.well.depth = w.number("depth");
        if (w.has("order")) {
            arr.well.order = static_cast<int>(w.integer("order"));
        }
    } else if (shape == "sampled") {
        arr.well.shape = WellShape::sampled;
        arr.well.samples = w.numbers("samples");
        arr.well.depth = *std::max_element(arr.well.samples.begin(), arr.well.samples.end());
    } else {
        throw ConfigError(w.path("shape") + ": unknown well shape '" + shape + "' (square, smooth_bump, sampled)");
    }
    if (s.has("shifts")) {
        const Json& shifts = s.raw("shifts");
        if (!shifts.is_array()) {
            throw ConfigError(s.path("shifts") + ": expected an array");
        }
        for (std::size_t i = 0; i < shifts.size(); ++i) {
            const Section e(shifts[i], s.path("shifts") + "[" + std::to_string(i) + "]");
            e.allow({"site", "shift"});
            arr.shifts[e.integer("site")] = e.number("shift");
        }
    }
    return arr;
}

void wrap_model(const std::string& where, auto&& fn) {
    try {
        fn();
    } catch (const ModelError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}  // namespace

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::contraction:
            return "contraction";
        case Scenario::zero_mean:
            return "zero_mean";
        case Scenario::negative_mean:
            return "negative_mean";
    }
    return "unknown";
}

CurveSpec parse_curve(const Json& j, const std::string& where) {
    const Section s(j, where);
    s.allow({"period_a", "gamma", "tau", "epsilon_scale"});
    CurveSpec spec;
    spec.period_a = s.positive("period_a");
    spec.gamma = parse_profile(s.child("gamma"));
    if (s.has("tau")) {
        parse_terms(s.child("tau"), spec.tau.terms);
    }
    if (s.has("epsilon_scale")) {
        spec.epsilon_scale = s.number("epsilon_scale");
    }
    wrap_model(where, [&] { validate(spec); });
    return spec;
}

Json curve_to_json(const CurveSpec& spec) {
    Json j;
    j["period_a"] = spec.period_a;
    std::visit(Overloaded{
                   [&](const FlatProfile&) { j["gamma"] = {{"kind", "flat"}}; },
                   [&](const SineProfile& p) {
                       j["gamma"] = {{"kind", "sine"}, {"params", {{"amplitude", p.amplitude}}}};
                   },
                   [&](const BumpTrainProfile& p) {
                       j["gamma"] = {{"kind", "bump_train"},
                                     {"params",
                                      {{"amplitude", p.amplitude}, {"half_width", p.half_width}, {"order", p.order}}}};
                   },
               },
               spec.gamma);
    Json terms = Json::array();
    for (const auto& t : spec.tau.terms) {
        std::visit(Overloaded{
                       [&](const SmoothContraction& c) {
                           terms.push_back({{"kind", "smooth_contraction"},
                                            {"params", {{"depth", c.depth}, {"half_width", c.half_width}}}});
                       },
                       [&](const ZeroMeanWiggle& w) {
                           terms.push_back({{"kind", "zero_mean_wiggle"},
                                            {"params", {{"amplitude", w.amplitude}, {"half_width", w.half_width}}}});
                       },
                       [&](const StepShifts& s) {
                           Json steps = Json::array();
                           for (const auto& st : s.steps) {
                               steps.push_back({{"lo", st.lo}, {"hi", st.hi}, {"shift", st.shift}});
                           }
                           terms.push_back({{"kind", "step_shifts"}, {"params", {{"steps", steps}}}});
                       },
                   },
                   t);
    }
    if (terms.empty()) {
        j["tau"] = {{"kind", "zero"}};
    } else if (terms.size() == 1) {
        j["tau"] = terms[0];
    } else {
        j["tau"] = {{"kind", "sum"}, {"params", {{"terms", terms}}}};
    }
    if (spec.epsilon_scale) {
        j["epsilon_scale"] = *spec.epsilon_scale;
    }
    return j;
}

std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

ExperimentConfig parse_config(const Json& doc) {
    const Section root(doc, "config");
    root.allow({"curve", "alpha", "threshold", "bands", "bound_state", "oned", "seed"});
    ExperimentConfig cfg;
    cfg.document = doc;
    cfg.hash = sha256_hex(doc.dump());
    if (root.has("curve")) {
        cfg.curve = parse_curve(root.raw("curve"));
    }
    if (root.has("alpha")) {
        cfg.alpha = root.positive("alpha");
    }
    if (root.has("seed")) {
        const Json& s = root.raw("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw ConfigError("config.seed: expected a nonnegative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }
    if (root.has("threshold")) {
        const Section t = root.child("threshold");
        t.allow({"n_cell", "n_images", "tail_tol", "refine"});
        cfg.threshold.n_cell = t.count_or("n_cell", cfg.threshold.n_cell);
        cfg.threshold.n_images = t.count_or("n_images", cfg.threshold.n_images);
        cfg.threshold.tail_tol = t.positive_or("tail_tol", cfg.threshold.tail_tol);
        cfg.threshold.refine = t.flag_or("refine", cfg.threshold.refine);
    }
    if (root.has("bands")) {
        const Section b = root.child("bands");
        b.allow({"n_theta", "bands", "n_cell", "tail_tol", "kappa_floor"});
        cfg.bands.n_theta = b.count_or("n_theta", cfg.bands.n_theta);
        cfg.bands.bands = b.count_or("bands", cfg.bands.bands);
        cfg.bands.n_cell = b.count_or("n_cell", cfg.bands.n_cell);
        cfg.bands.tail_tol = b.positive_or("tail_tol", cfg.bands.tail_tol);
        cfg.bands.kappa_floor = b.positive_or("kappa_floor", cfg.bands.kappa_floor);
        if (cfg.bands.n_theta < 9 || cfg.bands.n_theta % 2 == 0) {
            throw ConfigError("config.bands.n_theta: must be odd and at least 9");
        }
    }
    if (root.has("bound_state")) {
        const Section b = root.child("bound_state");
        b.allow({"scenario", "window_W", "n", "n_cell", "margin_tol", "refine", "mollifiers", "convexity_points",
                 "scan_points"});
        BoundStateSection s;
        if (b.has("scenario")) {
            const std::string sc = b.text("scenario");
            if (sc == "contraction") {
                s.scenario = Scenario::contraction;
            } else if (sc == "zero_mean") {
                s.scenario = Scenario::zero_mean;
            } else if (sc == "negative_mean") {
                s.scenario = Scenario::negative_mean;
            } else {
                throw ConfigError("config.bound_state.scenario: unknown scenario '" + sc +
                                  "' (contraction, zero_mean, negative_mean)");
            }
        }
        s.window_W = b.positive("window_W");
        s.n = b.count("n");
        s.n_cell = b.count_or("n_cell", s.n_cell);
        s.margin_tol = b.positive_or("margin_tol", s.margin_tol);
        s.refine = b.flag_or("refine", s.refine);
        if (b.has("mollifiers")) {
            s.mollifiers = b.numbers("mollifiers");
        }
        s.convexity_points = b.count_or("convexity_points", s.convexity_points);
        s.scan_points = b.count_or("scan_points", s.scan_points);
        cfg.bound_state = s;
    }
    if (root.has("oned")) {
        const Section o = root.child("oned");
        o.allow({"spacing", "well", "shifts", "steps_per_period", "window_wells", "n_per_a", "bs", "random_sweep",
                 "discriminant", "strong_coupling"});
        OnedSection s;
        if (o.has("spacing") || o.has("well")) {
            s.array = parse_array(o);
            wrap_model("config.oned", [&] { validate(*s.array); });
        } else if (!o.has("strong_coupling")) {
            throw ConfigError("config.oned: missing required key 'spacing'");
        }
        s.steps_per_period = o.count_or("steps_per_period", s.steps_per_period);
        s.window_wells = o.count_or("window_wells", s.window_wells);
        s.n_per_a = o.count_or("n_per_a", s.n_per_a);
        if (s.window_wells % 2 == 0) {
            throw ConfigError("config.oned.window_wells: must be odd");
        }
        if (o.has("bs")) {
            const Section b = o.child("bs");
            b.allow({"window_W", "points_per_well", "richardson"});
            s.bs_window_W = b.positive("window_W");
            s.points_per_well = b.count_or("points_per_well", s.points_per_well);
            s.richardson = b.flag_or("richardson", s.richardson);
        }
        if (o.has("random_sweep")) {
            const Section r = o.child("random_sweep");
            r.allow({"count", "site_lo", "site_hi", "min_shift", "max_shift"});
            SweepSection sw;
            sw.count = r.count("count");
            sw.site_lo = r.has("site_lo") ? r.integer("site_lo") : sw.site_lo;
            sw.site_hi = r.has("site_hi") ? r.integer("site_hi") : sw.site_hi;
            sw.min_shift = r.number_or("min_shift", sw.min_shift);
            sw.max_shift = r.number_or("max_shift", sw.max_shift);
            if (sw.site_hi < sw.site_lo || !(sw.max_shift >= sw.min_shift) || sw.min_shift < 0.0) {
                throw ConfigError("config.oned.random_sweep: inconsistent site or shift range");
            }
            s.sweep = sw;
        }
        if (o.has("discriminant")) {
            const Section d = o.child("discriminant");
            d.allow({"e_lo", "e_hi", "count"});
            s.discriminant = DiscriminantSection{d.number("e_lo"), d.number("e_hi"), d.count("count")};
        }
        if (s.array) {
            // every shifted site needs 10 unshifted wells on each side inside the window
            long far = 0;
            for (const auto& [n, d] : s.array->shifts) {
                far = std::max(far, d != 0.0 ? std::labs(n) : 0L);
            }
            if (s.sweep) {
                far = std::max({far, std::labs(s.sweep->site_lo), std::labs(s.sweep->site_hi)});
            }
            if (s.window_wells < 21 || static_cast<long>(s.window_wells / 2) < far + 10) {
                throw ConfigError("config.oned.window_wells: need at least " + std::to_string(std::max(21L, 2 * far + 21)) +
                                  " wells for the shifted sites");
            }
        }
        if (o.has("strong_coupling")) {
            const Section c = o.child("strong_coupling");
            c.allow({"curve", "shifted_tau", "alpha_list", "S_half", "n", "points_per_period", "kappa_h",
                     "steps_per_period"});
            CouplingSection cs;
            cs.curve = parse_curve(c.raw("curve"), c.path("curve"));
            if (c.has("shifted_tau")) {
                CurveSpec shifted = cs.curve.unperturbed();
                parse_terms(c.child("shifted_tau"), shifted.tau.terms);
                wrap_model(c.path("shifted_tau"), [&] { validate(shifted); });
                cs.shifted = shifted;
            }
            cs.alpha_list = c.numbers("alpha_list");
            cs.S_half = c.positive("S_half");
            cs.n = c.count("n");
            cs.points_per_period = c.count_or("points_per_period", cs.points_per_period);
            cs.kappa_h = c.positive_or("kappa_h", cs.kappa_h);
            cs.steps_per_period = c.count_or("steps_per_period", cs.steps_per_period);
            s.coupling = cs;
        }
        cfg.oned = s;
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

}  // namespace leaky
