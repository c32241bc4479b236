// Command-line front end.  Deliberately thin: everything goes through the C
// API in kerrcat.h so the CLI doubles as a smoke test of the shared library
// surface.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "kerrcat.h"

namespace {

int run_subcommand(const std::string& name, const std::string& config_path,
                   const std::string& out_dir, long long seed, int threads) {
    std::ifstream f(config_path);
    if (!f) {
        std::cerr << "error: cannot open config file: " << config_path << "\n";
        return 2;
    }
    std::stringstream buf;
    buf << f.rdbuf();

    char* report = nullptr;
    int rc = kc_run(name.c_str(), buf.str().c_str(), out_dir.c_str(), seed, threads, &report);
    if (rc != KC_OK) {
        std::cerr << "error (" << kc_last_error_kind() << "): " << kc_last_error_message()
                  << "\n";
        return rc;
    }
    if (report) {
        std::cout << report << "\n";
        kc_string_free(report);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kerrcat: Kerr-tunable SNAIL resonator simulator and calibration toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    long long seed = -1;
    int threads = 0;
    app.add_option("--config", config_path, "path to the JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory for artifacts");
    app.add_option("--seed", seed, "seed for shot sampling (overrides the config)");
    app.add_option("--threads", threads, "worker threads for grids and sweeps");

    for (const char* name : {"flux-sweep", "cat", "measure-kerr", "preserve", "calibrate",
                             "wigner", "fidelity"}) {
        // global flags may appear before or after the subcommand name
        app.add_subcommand(name)->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    return run_subcommand(app.get_subcommands().front()->get_name(), config_path, out_dir,
                          seed, threads);
}
