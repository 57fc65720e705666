#include "snb/cli/commands.hpp"
#include "snb/cli/config.hpp"
#include "snb/cli/csv.hpp"
#include "snb/cli/toml_lite.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace snb;
using namespace snb::cli;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

const std::filesystem::path kConfigDir = SNB_CONFIG_DIR;

const char* kMinimal = R"(
[converter]
v_s = 20.0
R = 22.0
L = 20e-3
C = 47e-6
T = 400e-6
V_m = 1.0
v_r = 0.2152

[control]
scheme = "state_feedback"
k_i = 2.1435
k_v = -0.1383
)";

Error capture(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an snb::Error");
    return Error(ErrorCategory::cli, "", "");
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

} // namespace

TEST_CASE("toml subset", "[cli][config]") {
    const Document doc = parse_toml(R"(
top = 1_000.5   # comment
[t]
a = -2.5e-3
flag = true
s = "x # not a comment"
lit = 'raw\n'
arr = [1, 2.5, -3e2]
empty = []
)");
    CHECK(std::get<double>(doc.at("").at("top").value) == 1000.5);
    const Table& t = doc.at("t");
    CHECK(std::get<double>(t.at("a").value) == -2.5e-3);
    CHECK(std::get<bool>(t.at("flag").value));
    CHECK(std::get<std::string>(t.at("s").value) == "x # not a comment");
    CHECK(std::get<std::string>(t.at("lit").value) == "raw\\n");
    CHECK(std::get<std::vector<double>>(t.at("arr").value) == std::vector<double>{1.0, 2.5, -300.0});
    CHECK(std::get<std::vector<double>>(t.at("empty").value).empty());
    CHECK(t.at("a").line == 4);
}

TEST_CASE("toml errors carry line numbers", "[cli][config]") {
    const auto e1 = capture([] { (void)parse_toml("[a]\nx = 1\nx = 2\n"); });
    CHECK(e1.kind() == "ParseError");
    CHECK(e1.category() == ErrorCategory::config);
    CHECK_THAT(std::string(e1.what()), ContainsSubstring("line 3"));
    const auto e2 = capture([] { (void)parse_toml("[a]\n\nx = 1.2.3\n"); });
    CHECK_THAT(std::string(e2.what()), ContainsSubstring("line 3"));
    const auto e3 = capture([] { (void)parse_toml("[a\n"); });
    CHECK_THAT(std::string(e3.what()), ContainsSubstring("line 1"));
    const auto e4 = capture([] { (void)parse_toml("s = \"open\n"); });
    CHECK(e4.kind() == "ParseError");
}

TEST_CASE("json and toml configs agree", "[cli][config]") {
    const RunConfig from_toml = parse_config(parse_document(kMinimal));
    const RunConfig from_json = parse_config(parse_document(R"({
        "converter": {"v_s": 20.0, "R": 22.0, "L": 0.02, "C": 47e-6, "f_s_hz": 2500,
                      "V_m": 1.0, "v_r": 0.2152},
        "control": {"scheme": "state_feedback", "k_i": 2.1435, "k_v": -0.1383}
    })"));
    CHECK(from_toml.converter.L == from_json.converter.L);
    CHECK_THAT(from_json.converter.T, WithinRel(400e-6, 1e-15));
    CHECK(from_toml.series_terms == kDefaultSeriesTerms);
    CHECK(from_toml.duty_grid == kDefaultDutyGrid);
    const auto& sf = std::get<StateFeedback>(from_json.converter.scheme);
    CHECK(sf.k_i == 2.1435);
    CHECK(sf.k_v == -0.1383);
    CHECK(from_toml.converter.R_c == 0.0);
}

TEST_CASE("schema violations name the key", "[cli][config]") {
    const auto missing = capture([] { (void)parse_config(parse_toml(replace(kMinimal, "L = 20e-3\n", ""))); });
    CHECK(missing.kind() == "SchemaError");
    CHECK(missing.category() == ErrorCategory::config);
    CHECK_THAT(std::string(missing.what()), ContainsSubstring("L"));

    const auto negative = capture([] { (void)parse_config(parse_toml(replace(kMinimal, "C = 47e-6", "C = -1e-6"))); });
    CHECK(negative.kind() == "InvariantViolation");
    CHECK_THAT(std::string(negative.what()), ContainsSubstring("C"));

    const auto unknown = capture([] { (void)parse_config(parse_toml(std::string(kMinimal) + "\n[plot]\nDmin = 0.1\n")); });
    CHECK(unknown.kind() == "SchemaError");
    CHECK_THAT(std::string(unknown.what()), ContainsSubstring("Dmin"));

    const auto table = capture([] { (void)parse_config(parse_toml(std::string(kMinimal) + "\n[extras]\na = 1\n")); });
    CHECK(table.kind() == "SchemaError");

    const auto type = capture([] { (void)parse_config(parse_toml(replace(kMinimal, "R = 22.0", "R = \"22\""))); });
    CHECK(type.kind() == "SchemaError");
    CHECK_THAT(std::string(type.what()), ContainsSubstring("R"));

    const auto scheme = capture([] { (void)parse_config(parse_toml(replace(kMinimal, "\"state_feedback\"", "\"pid\""))); });
    CHECK(scheme.kind() == "SchemaError");

    const auto both = capture([] { (void)parse_config(parse_toml(replace(kMinimal, "T = 400e-6", "T = 400e-6\nf_s_hz = 2500"))); });
    CHECK(both.category() == ErrorCategory::config);
}

TEST_CASE("control schemes load", "[cli][config]") {
    const RunConfig vmc = parse_config(parse_toml(replace(
        kMinimal, "scheme = \"state_feedback\"\nk_i = 2.1435\nk_v = -0.1383",
        "scheme = \"vmc\"\ngc_num = [0.8, 4e-4]\ngc_den = [1.0, 2e-5]")));
    const auto& gc = std::get<Vmc>(vmc.converter.scheme).gc;
    CHECK(gc.num().size() == 2);
    CHECK(gc.den()[1] == 2e-5);

    const RunConfig cmc = load_config(kConfigDir / "cmc_example.toml");
    CHECK(std::holds_alternative<Cmc>(cmc.converter.scheme));

    const RunConfig custom = parse_config(parse_toml(replace(
        kMinimal, "scheme = \"state_feedback\"\nk_i = 2.1435\nk_v = -0.1383",
        "scheme = \"custom\"\nf_num = [1.0]\nf_den = [1.0, 1e-3]")));
    CHECK(std::get<Custom>(custom.converter.scheme).dc_offset_gain == 1.0);

    const auto missing_file = capture([] { (void)load_config("/nonexistent/snb.toml"); });
    CHECK(missing_file.kind() == "IOError");
    CHECK(missing_file.category() == ErrorCategory::config);
}

TEST_CASE("csv formatting", "[cli][csv]") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(std::nan("")).empty());
    CHECK(format_number(INFINITY).empty());

    CsvTable t;
    t.header = {"a", "b,c", "d"};
    t.rows.push_back({1.5, std::monostate{}, std::string("say \"hi\"")});
    t.rows.push_back({long{42}, optional_cell(std::nullopt), optional_cell(2.0)});
    std::ostringstream os;
    write_csv(t, os);
    CHECK(os.str() == "a,\"b,c\",d\n1.5,,\"say \"\"hi\"\"\"\n42,,2\n");

    std::istringstream is(os.str());
    const auto rows = read_csv(is);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][1] == "b,c");
    CHECK(rows[1][1].empty());
    CHECK(rows[1][2] == "say \"hi\"");

    CsvTable empty;
    empty.header = {"x", "y"};
    std::ostringstream eo;
    write_csv(empty, eo);
    CHECK(eo.str() == "x,y\n");
}

TEST_CASE("csv numbers round-trip", "[cli][csv][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-12, 12);
    for (int i = 0; i < 2000; ++i) {
        const double v = mant(rng) * std::pow(10.0, expo(rng));
        const double back = std::stod(format_number(v));
        CHECK(std::abs(back - v) <= 1e-12 * std::abs(v));
    }
}

TEST_CASE("command names and exit codes", "[cli]") {
    CHECK(parse_command("splot") == Command::splot);
    CHECK(std::string(to_string(Command::boundary)) == "boundary");
    CHECK(capture([] { (void)parse_command("plot"); }).kind() == "UnknownCommand");
    CHECK(exit_code(ErrorCategory::config) == 2);
    CHECK(exit_code(ErrorCategory::cli) == 2);
    CHECK(exit_code(ErrorCategory::critical) == 3);
    CHECK(exit_code(ErrorCategory::switching_sim) == 3);
    const auto j = nlohmann::json::parse(error_json("config", "SchemaError", "'converter.L': missing"));
    CHECK(j["error"]["category"] == "config");
    CHECK(j["error"]["kind"] == "SchemaError");
    CHECK(j["error"]["message"] == "'converter.L': missing");
}

TEST_CASE("analyze report", "[cli]") {
    RunOptions opts;
    opts.config = kConfigDir / "state_feedback_example.toml";
    opts.grid = 400;
    opts.series_n = 4000;
    const RunConfig cfg = resolve(opts);
    CHECK(cfg.duty_grid == 400);
    CHECK(cfg.series_terms == 4000);
    const auto report = analyze_report(cfg);
    REQUIRE(report["snb"].size() == 1);
    CHECK_THAT(report["snb"][0]["v_s_star"].get<double>(), WithinRel(20.0, 0.01));
    CHECK_THAT(report["snb"][0]["D_star"].get<double>(), WithinRel(0.70, 0.01));
    CHECK(report["closed_form"]["state_feedback"]["valid"].get<bool>());

    std::ostringstream first;
    std::ostringstream second;
    std::ostringstream err;
    CHECK(run_guarded(opts, first, err) == 0);
    CHECK(run_guarded(opts, second, err) == 0);
    CHECK(first.str() == second.str());
    CHECK(err.str().empty());
    CHECK(nlohmann::json::parse(first.str())["series_terms"] == 4000);
}

TEST_CASE("plot tables", "[cli]") {
    RunOptions opts;
    opts.config = kConfigDir / "state_feedback_example.toml";
    opts.grid = 200;
    opts.series_n = 2000;
    RunConfig cfg = resolve(opts);
    cfg.plot.points = 50;
    const CsvTable s = splot_table(cfg);
    CHECK(s.header == std::vector<std::string>{"D", "v_s_implied", "s_value", "m_a", "stable_hint"});
    CHECK(s.rows.size() == 50);
    const CsvTable l = lplot_table(cfg);
    CHECK(l.header == std::vector<std::string>{"D", "v_s_implied", "l_value", "criterion", "stable_hint"});
    CHECK(l.rows.size() == 50);
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        CHECK(s.rows[i][4] == l.rows[i][4]);
    }
}

TEST_CASE("simulate writes a file", "[cli]") {
    const auto dir = std::filesystem::temp_directory_path() / "snb_cli_test";
    std::filesystem::create_directories(dir);
    RunOptions opts;
    opts.command = Command::simulate;
    opts.config = kConfigDir / "state_feedback_example.toml";
    opts.out = dir / "sim.csv";
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(run_guarded(opts, out, err) == 0);
    std::ifstream in(*opts.out);
    const auto rows = read_csv(in);
    REQUIRE(rows.size() > 1);
    CHECK(rows[0] == std::vector<std::string>{"t", "i_L", "v_C", "y", "h", "stage"});
    for (std::size_t i = 2; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][0]) > std::stod(rows[i - 1][0]));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("guarded runs report errors as json", "[cli]") {
    std::ostringstream out;
    std::ostringstream err;
    RunOptions missing;
    missing.config = "/nonexistent/x.toml";
    CHECK(run_guarded(missing, out, err) == 2);
    const auto j = nlohmann::json::parse(err.str());
    CHECK(j["error"]["category"] == "config");
    CHECK(j["error"]["kind"] == "IOError");

    const auto dir = std::filesystem::temp_directory_path() / "snb_cli_guard";
    std::filesystem::create_directories(dir);
    const auto cfg_path = dir / "vm0.toml";
    {
        std::ofstream f(cfg_path);
        f << replace(kMinimal, "V_m = 1.0", "V_m = 0.0");
    }
    RunOptions lplot;
    lplot.command = Command::lplot;
    lplot.config = cfg_path;
    lplot.grid = 50;
    lplot.series_n = 1000;
    std::ostringstream err2;
    CHECK(run_guarded(lplot, out, err2) == 3);
    CHECK(nlohmann::json::parse(err2.str())["error"]["kind"] == "InfiniteLoopGain");
    std::filesystem::remove_all(dir);
}
