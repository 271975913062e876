// leaky-spectra <threshold|bands|bound-state|oned> --config <path> [--out <dir>]

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "leaky/commands.hpp"
#include "leaky/errors.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

void write_files(const leaky::CommandResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& f : result.files) {
        std::ofstream out(dir / f.name, std::ios::binary);
        out << f.content;
        if (!out) {
            throw leaky::ConfigError("cannot write " + (dir / f.name).string());
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectra of leaky periodic curves and 1D well arrays"};
    app.require_subcommand(1);
    std::string config;
    std::string out_dir = ".";
    using Runner = leaky::CommandResult (*)(const leaky::ExperimentConfig&);
    Runner runner = nullptr;
    auto add = [&](const char* name, const char* help, Runner fn) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "JSON experiment document")->required();
        sub->add_option("--out", out_dir, "Output directory");
        sub->callback([&runner, fn] { runner = fn; });
    };
    add("threshold", "Bottom of the essential spectrum", leaky::run_threshold);
    add("bands", "Band functions over the Brillouin zone", leaky::run_bands);
    add("bound-state", "Bound state of a deformed curve", leaky::run_bound_state);
    add("oned", "Shifted well arrays and the strong-coupling comparison", leaky::run_oned);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const leaky::ExperimentConfig cfg = leaky::load_config(config);
        const leaky::CommandResult result = runner(cfg);
        write_files(result, out_dir);
        std::cout << result.summary << "\n";
        return 0;
    } catch (const leaky::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const leaky::ModelError& e) {
        std::cerr << "invalid model: " << e.what() << "\n";
        return kExitConfig;
    } catch (const leaky::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const leaky::DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
