#include "snb/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Saddle-node bifurcation analysis of PWM DC-DC converters"};
    app.set_help_flag("-h,--help", "Print this help message and exit");

    std::string command;
    std::string config;
    std::string out;
    long series_n = 0;
    int grid = 0;

    app.add_option("command", command, "analyze | splot | lplot | sweep | simulate | boundary")->required();
    app.add_option("--config", config, "Configuration file (TOML or JSON)")->required();
    auto* out_opt = app.add_option("--out", out, "Output path (stdout when omitted)");
    auto* n_opt = app.add_option("--series-n", series_n, "Harmonics in the steady-state sums")
                      ->check(CLI::Range(16L, 100000000L));
    auto* grid_opt = app.add_option("--grid", grid, "Duty grid points")->check(CLI::Range(2, 100000000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << snb::cli::error_json("cli", "UsageError", e.what()) << '\n';
        return 2;
    }

    snb::cli::RunOptions opts;
    try {
        opts.command = snb::cli::parse_command(command);
    } catch (const snb::Error& e) {
        std::cerr << snb::cli::error_json(snb::to_string(e.category()), e.kind(), e.what()) << '\n';
        return snb::cli::exit_code(e.category());
    }
    opts.config = config;
    if (*out_opt) {
        opts.out = out;
    }
    if (*n_opt) {
        opts.series_n = series_n;
    }
    if (*grid_opt) {
        opts.grid = grid;
    }
    return snb::cli::run_guarded(opts, std::cout, std::cerr);
}
