// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "leaky/bsop.hpp"
#include "leaky/commands.hpp"
#include "leaky/config.hpp"
#include "leaky/specfun.hpp"
#include "leaky/spectral.hpp"
#include "oracles.hpp"

using namespace leaky;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kA = 2.0 * kPi;

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    Verdict() { detail.precision(10); }

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Json record(const CommandResult& r, const std::string& name) {
    for (const auto& f : r.files) {
        if (f.name == name) {
            return Json::parse(f.content);
        }
    }
    throw std::runtime_error("no output named " + name);
}

CurveSpec sine(double amp) {
    CurveSpec s;
    s.period_a = kA;
    s.gamma = SineProfile{amp};
    return s;
}

void criterion1(Verdict& v) {
    double worst = 0.0;
    double worst_refined = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
        const double exact = -0.25 * alpha * alpha;
        ThresholdOptions o;
        const Threshold t = find_threshold(sine(0.0), alpha, o);
        ThresholdOptions fine;
        fine.n_cell = 2 * o.n_cell;
        fine.n_images = 2 * t.n_images;
        const Threshold tf = find_threshold(sine(0.0), alpha, fine);
        worst = std::max(worst, std::abs(t.eps0 / exact - 1.0));
        worst_refined = std::max(worst_refined, std::abs(tf.eps0 / exact - 1.0));
    }
    v.require(worst < 1e-2, "standard resolution within 1%");
    v.require(worst_refined < 1e-3, "refined within 0.1%");
    v.detail << "max rel err " << fmt(worst) << ", refined " << fmt(worst_refined);
}

void criterion2(Verdict& v) {
    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 2.0}) {
        for (double f : {0.8, 1.0, 1.25}) {
            const double kappa = 0.5 * alpha * f;
            const double W = 60.0 / kappa;
            const auto n = static_cast<std::size_t>(std::ceil(2.0 * W * std::max(kappa / 0.1, 16.0 / kA)));
            const double mu = mu_max(build_line_bs(sine(0.0), alpha, kappa, W, n));
            worst = std::max(worst, std::abs(mu / (alpha / (2.0 * kappa)) - 1.0));
        }
    }
    v.require(worst < 0.02, "within 2% of alpha/(2 kappa)");
    v.detail << "max rel dev " << fmt(worst);
}

void criterion3(Verdict& v) {
    const CurveSpec s = sine(0.5);
    const double k0 = find_threshold(s, 1.0).kappa0;
    CurveSpec contracted = s;
    contracted.tau.terms.push_back(SmoothContraction{0.4, 2.0 * kA});
    WellArray1D arr;
    arr.spacing = 4.0;
    arr.well.depth = 1.0;
    arr.well.width = 2.0;
    arr.shifts[0] = 1.2;

    struct Family {
        const char* name;
        std::function<BSMatrix(double)> build;
        double lo;
        double hi;
    };
    FiberConfig f0;
    FiberConfig f1;
    f1.theta = 0.3;
    const std::vector<Family> families{
        {"line", [&](double k) { return build_line_bs(contracted, 1.0, k, 12.0 * kA, 384); }, 0.1, 1.2},
        {"fiber0", [&](double k) { return build_fiber_bs(s, 1.0, k, f0, 32); }, 0.05, 2.0},
        {"fiber", [&](double k) { return build_fiber_bs(s, 1.0, k, f1, 32); }, 0.05, 2.0},
        {"oned", [&](double k) { return build_1d_bs(arr, k, 40.0, 16); }, 0.05, 5.0},
    };
    int checked = 0;
    for (const auto& fam : families) {
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 10; ++i) {
            const double k = fam.lo * std::pow(fam.hi / fam.lo, i / 9.0);
            const double mu = mu_max(fam.build(k));
            v.require(mu < prev && mu > 0.0, std::string(fam.name) + " monotone at kappa " + fmt(k));
            prev = mu;
            ++checked;
        }
    }
    // same discretization at kappa0 and 50 kappa0: kappa h <= 0.5 at the upper end
    const double r_fiber = mu_max(build_fiber_bs(s, 1.0, 50.0 * k0, f0, 640)) /
                           mu_max(build_fiber_bs(s, 1.0, k0, f0, 640));
    const double r_line = mu_max(build_line_bs(s, 1.0, 50.0 * k0, kA, 1280)) /
                          mu_max(build_line_bs(s, 1.0, k0, kA, 1280));
    const double r_oned = mu_max(build_1d_bs(arr, 50.0 * 0.762, 40.0, 128)) / mu_max(build_1d_bs(arr, 0.762, 40.0, 128));
    v.require(r_fiber < 0.05 && r_line < 0.05 && r_oned < 0.05, "mu(50 kappa0) < 0.05 mu(kappa0)");
    v.detail << checked << " grid points on 4 families; mu(50k0)/mu(k0) fiber " << fmt(r_fiber) << ", line "
             << fmt(r_line) << ", oned " << fmt(r_oned);
}

void criterion4(Verdict& v, const fs::path& dir) {
    const Json j = record(run_bound_state(load_config((dir / "contraction.json").string())), "bound_state.json");
    v.require(j["status"] == "found", "bound state found");
    bool margins = j["diagnostics"]["refinements"].size() == 3;
    for (const auto& r : j["diagnostics"]["refinements"]) {
        margins = margins && r["margin"].get<double>() > 0.0;
    }
    v.require(margins, "margin survives window and grid doubling");
    const double ks = j["kappa_star"].get<double>();
    const double k0 = j["kappa0"].get<double>();
    v.require(ks > k0, "kappa* > kappa0");
    const double mu = j["diagnostics"]["mu_at_kappa_star"].get<double>();
    v.require(std::abs(mu - 1.0) <= 1e-8, "|mu(kappa*) - 1| <= 1e-8");
    const auto& tg = j["trial_gap"];
    bool gaps = true;
    for (std::size_t i = 0; i < tg["mollifiers"].size(); ++i) {
        const double n = tg["mollifiers"][i].get<double>();
        if (n >= 8 && n <= 64) {
            gaps = gaps && tg["gap"][i].get<double>() > 0.0;
        }
    }
    v.require(gaps, "trial gap positive for n in {8,16,32,64}");
    const double p = tg["decay_exponent"].get<double>();
    v.require(p <= -1.5, "decay exponent <= -1.5");
    v.detail << "kappa0 " << k0 << ", kappa* " << ks << ", margin " << fmt(j["margin"].get<double>())
             << ", |mu-1| " << fmt(std::abs(mu - 1.0)) << ", decay exponent " << fmt(p);
}

void criterion5(Verdict& v, const fs::path& dir) {
    const Json j = record(run_bound_state(load_config((dir / "zero_mean.json").string())), "bound_state.json");
    v.require(j["status"] == "found", "eps = 0.05 bound state found");
    v.require(j["convexity"]["all_positive"].get<bool>(), "convexity margin positive on the scan");
    const Json s = record(run_bound_state(load_config((dir / "zero_mean_strong.json").string())), "bound_state.json");
    const std::string st = s["status"].get<std::string>();
    v.require(st == "found" || st == "inconclusive" || st == "insufficient_resolution", "eps = 0.8 status");
    v.detail << "eps 0.05: " << j["status"].get<std::string>() << ", kappa* " << j["kappa_star"].get<double>()
             << ", convexity min " << fmt(j["convexity"]["min_margin"].get<double>()) << " over "
             << j["convexity"]["points"].get<int>() << " points (" << j["convexity"]["skipped"].get<int>()
             << " singular skipped); eps 0.8: " << st;
}

void criterion6(Verdict& v, const fs::path& dir) {
    const Json j = record(run_bound_state(load_config((dir / "negative_mean.json").string())), "bound_state.json");
    v.require(j["status"] == "found", "bound state found");
    v.require(j.contains("dominates") && j["dominates"].get<bool>(), "kappa* >= dominating kappa*");
    v.detail << "kappa* " << j["kappa_star"].get<double>() << " vs dominating "
             << j["dominating"]["kappa_star"].get<double>();
}

void criterion7(Verdict& v, const fs::path& dir) {
    const Json j = record(run_oned(load_config((dir / "oned_sweep.json").string())), "oned.json");
    const auto& cases = j["random_sweep"]["cases"];
    v.require(cases.size() == 12, "12 cases");
    double worst = 0.0;
    double closest = -std::numeric_limits<double>::infinity();
    const double eps0 = j["band_bottom"]["eps0"].get<double>();
    bool below = true;
    bool agree = true;
    for (const auto& c : cases) {
        const double g = c["ground"].get<double>();
        below = below && g < eps0 - 1e-6;
        closest = std::max(closest, g - eps0);
        const double rd = c["bs"]["relative_difference"].is_number() ? c["bs"]["relative_difference"].get<double>() : 1.0;
        agree = agree && rd < 1e-4;
        worst = std::max(worst, rd);
    }
    v.require(below, "all below band - 1e-6");
    v.require(agree, "BS and FD agree to 1e-4");
    v.detail << cases.size() << " cases, max(ground - eps0) " << fmt(closest) << ", max BS/FD rel diff "
             << fmt(worst);
}

void criterion8(Verdict& v, const fs::path& dir) {
    const CommandResult r = run_oned(load_config((dir / "strong_coupling.json").string()));
    const Json j = record(r, "oned.json")["strong_coupling"];
    v.require(j["delta_decreases"].get<bool>(), "Delta(16) < Delta(4)");
    v.require(j["ratio_nonincreasing_top"].get<bool>(), "ratio non-increasing 8 -> 16");
    v.require(j["shifted"]["below_band"].get<bool>(), "shifted eigenvalue below band bottom");
    std::string csv;
    for (const auto& f : r.files) {
        if (f.name == "coupling.csv") {
            csv = f.content;
        }
    }
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) {
            cols.push_back(c);
        }
        v.detail << "alpha " << cols[0] << ": Delta " << fmt(std::stod(cols[3])) << " ratio " << fmt(std::stod(cols[4]))
                 << "; ";
    }
    v.detail << "shifted lowest " << j["shifted"]["shifted_lowest"].get<double>() << " < band "
             << j["shifted"]["band_bottom"].get<double>();
}

void criterion9(Verdict& v) {
    double e0 = 0.0;
    double e1 = 0.0;
    double ed = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double x = 0.01 * std::pow(1e4, i / 39.0);
        e0 = std::max(e0, std::abs(specfun::bessel_k0(x) / oracle::k0(x) - 1.0));
        e1 = std::max(e1, std::abs(specfun::bessel_k1(x) / oracle::k1(x) - 1.0));
        const double h = 1e-5 * x;
        const double d = (specfun::bessel_k0(x + h) - specfun::bessel_k0(x - h)) / (2.0 * h);
        ed = std::max(ed, std::abs(d / -specfun::bessel_k1(x) - 1.0));
    }
    v.require(e0 <= 1e-12 && e1 <= 1e-12, "oracle agreement 1e-12");
    v.require(ed <= 1e-6, "dK0/dx = -K1 to 1e-6");
    v.detail << "max rel err K0 " << fmt(e0) << ", K1 " << fmt(e1) << ", derivative " << fmt(ed);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion10(Verdict& v, const fs::path& dir, const fs::path& data, const fs::path& cli) {
    const fs::path work = fs::temp_directory_path() / "leaky_acceptance";
    fs::remove_all(work);
    struct Run {
        const char* sub;
        fs::path config;
    };
    const std::vector<Run> runs{{"threshold", dir / "sine_threshold.json"},
                                {"bands", dir / "sine_bands.json"},
                                {"bound-state", data / "bound_state.json"},
                                {"oned", data / "oned.json"},
                                {"oned", data / "coupling.json"}};
    std::size_t files = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        std::vector<fs::path> outs;
        for (const char* tag : {"a", "b"}) {
            const fs::path out = work / (std::to_string(k) + tag);
            const std::string cmd = "\"" + cli.string() + "\" " + runs[k].sub + " --config \"" +
                                    runs[k].config.string() + "\" --out \"" + out.string() + "\" > /dev/null";
            v.require(std::system(cmd.c_str()) == 0, std::string(runs[k].sub) + " exit status");
            outs.push_back(out);
        }
        for (const auto& e : fs::directory_iterator(outs[0])) {
            const fs::path other = outs[1] / e.path().filename();
            v.require(fs::exists(other) && slurp(e.path()) == slurp(other),
                      e.path().filename().string() + " identical");
            ++files;
        }
    }
    fs::remove_all(work);
    v.detail << files << " output files byte-identical across repeated runs";
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path configs = argc > 1 ? argv[1] : LEAKY_CONFIG_DIR;
    const fs::path data = argc > 2 ? argv[2] : LEAKY_TEST_DATA_DIR;
    const fs::path cli = argc > 3 ? argv[3] : LEAKY_CLI;
    const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
        {"straight-line threshold", criterion1},
        {"Fourier symbol", criterion2},
        {"BS monotonicity", criterion3},
        {"contraction bound state", [&](Verdict& v) { criterion4(v, configs); }},
        {"zero-mean bound state", [&](Verdict& v) { criterion5(v, configs); }},
        {"negative-mean domination", [&](Verdict& v) { criterion6(v, configs); }},
        {"shifted-array sweep", [&](Verdict& v) { criterion7(v, configs); }},
        {"strong coupling", [&](Verdict& v) { criterion8(v, configs); }},
        {"special functions", criterion9},
        {"determinism", [&](Verdict& v) { criterion10(v, configs, data, cli); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            criteria[i].second(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " [error: " << e.what() << "]";
        }
        failed += v.pass ? 0 : 1;
        std::printf("criterion %zu %s: %s  %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first,
                    v.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
