#pragma once

#include "snb/cli/config.hpp"
#include "snb/cli/csv.hpp"
#include "snb/error.hpp"
#include "snb/switching_sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace snb::cli {

enum class Command { analyze, splot, lplot, sweep, simulate, boundary };

[[nodiscard]] const char* to_string(Command c);
/// Throws Error(cli, "UnknownCommand").
[[nodiscard]] Command parse_command(const std::string& name);

struct RunOptions {
    Command command = Command::analyze;
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<long> series_n;
    std::optional<int> grid;
};

/// Config with the command-line overrides applied.
[[nodiscard]] RunConfig resolve(const RunOptions& opts);

[[nodiscard]] nlohmann::ordered_json analyze_report(const RunConfig& cfg);
[[nodiscard]] CsvTable splot_table(const RunConfig& cfg);
[[nodiscard]] CsvTable lplot_table(const RunConfig& cfg);
[[nodiscard]] std::vector<std::pair<SweepDirection, CsvTable>> sweep_tables(const RunConfig& cfg);
[[nodiscard]] CsvTable simulate_table(const RunConfig& cfg);
[[nodiscard]] CsvTable boundary_table(const RunConfig& cfg);

/// Runs one command. Output goes to opts.out when given, else to `out`.
/// Errors propagate.
void run(const RunOptions& opts, std::ostream& out);

[[nodiscard]] int exit_code(ErrorCategory c) noexcept;
[[nodiscard]] std::string error_json(const std::string& category, const std::string& kind, const std::string& message);

/// run() with every exception turned into a JSON line on `err` and an exit
/// status (0 ok, 2 config, 3 numeric).
[[nodiscard]] int run_guarded(const RunOptions& opts, std::ostream& out, std::ostream& err);

} // namespace snb::cli
