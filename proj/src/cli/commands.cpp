#include "snb/cli/commands.hpp"

#include "snb/critical.hpp"

#include <fstream>
#include <ostream>

namespace snb::cli {

namespace {

const char* scheme_name(const ControlScheme& s) {
    if (std::holds_alternative<StateFeedback>(s)) {
        return "state_feedback";
    }
    if (std::holds_alternative<Cmc>(s)) {
        return "cmc";
    }
    if (std::holds_alternative<Vmc>(s)) {
        return "vmc";
    }
    return "custom";
}

FindSnbOptions snb_options(const RunConfig& cfg) {
    FindSnbOptions o;
    o.grid = cfg.duty_grid;
    o.series_terms = cfg.series_terms;
    return o;
}

HarmonicBalanceModel make_model(const RunConfig& cfg) {
    return HarmonicBalanceModel(cfg.converter, SeriesOptions{cfg.series_terms});
}

std::vector<double> plot_grid(const RunConfig& cfg) {
    const int n = cfg.plot.points.value_or(cfg.duty_grid);
    if (n < 1) {
        detail::fail(ErrorCategory::config, "SchemaError", "'plot.points': must be >= 1");
    }
    return duty_grid(cfg.converter.T, n, cfg.plot.D_min, cfg.plot.D_max);
}

nlohmann::ordered_json nullable(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix) {
    std::filesystem::path out = p;
    out.replace_filename(p.stem().string() + suffix + p.extension().string());
    return out;
}

void emit_text(const std::string& text, const std::optional<std::filesystem::path>& path, std::ostream& out) {
    if (!path) {
        out << text;
        return;
    }
    std::ofstream f(*path, std::ios::binary);
    if (!f) {
        detail::fail(ErrorCategory::cli, "IOError", "cannot open '" + path->string() + "' for writing");
    }
    f << text;
    f.flush();
    if (!f) {
        detail::fail(ErrorCategory::cli, "IOError", "write to '" + path->string() + "' failed");
    }
}

void emit_table(const CsvTable& table, const std::optional<std::filesystem::path>& path, std::ostream& out) {
    if (path) {
        write_csv(table, *path);
    } else {
        write_csv(table, out);
    }
}

} // namespace

const char* to_string(Command c) {
    switch (c) {
    case Command::analyze: return "analyze";
    case Command::splot: return "splot";
    case Command::lplot: return "lplot";
    case Command::sweep: return "sweep";
    case Command::simulate: return "simulate";
    case Command::boundary: return "boundary";
    }
    return "";
}

Command parse_command(const std::string& name) {
    for (Command c : {Command::analyze, Command::splot, Command::lplot, Command::sweep, Command::simulate,
                      Command::boundary}) {
        if (name == to_string(c)) {
            return c;
        }
    }
    detail::fail(ErrorCategory::cli, "UnknownCommand",
                 "unknown command '" + name + "' (analyze, splot, lplot, sweep, simulate, boundary)");
}

RunConfig resolve(const RunOptions& opts) {
    RunConfig cfg = load_config(opts.config);
    if (opts.series_n) {
        cfg.series_terms = *opts.series_n;
    }
    if (opts.grid) {
        cfg.duty_grid = *opts.grid;
    }
    if (cfg.series_terms < 16) {
        detail::fail(ErrorCategory::config, "SchemaError", "'series_terms': must be >= 16");
    }
    if (cfg.duty_grid < 2) {
        detail::fail(ErrorCategory::config, "SchemaError", "'duty_grid': must be >= 2");
    }
    return cfg;
}

nlohmann::ordered_json analyze_report(const RunConfig& cfg) {
    const ConverterSpec& spec = cfg.converter;
    const HarmonicBalanceModel model = make_model(cfg);
    const LoopGain& lg = model.loop_gain();

    nlohmann::ordered_json report;
    report["converter"] = {{"v_s", spec.v_s}, {"R", spec.R},     {"L", spec.L},     {"C", spec.C},
                           {"R_c", spec.R_c}, {"T", spec.T},     {"V_m", spec.V_m}, {"v_r", spec.v_r},
                           {"scheme", scheme_name(spec.scheme)}, {"K", spec.K()},   {"m_a", spec.ramp_slope()}};

    std::optional<double> t0;
    if (lg.loop) {
        const DcGain dc = dc_gain(*lg.loop);
        if (!dc.infinite) {
            t0 = dc.value;
        }
    }
    report["T0"] = nullable(t0);

    FindSnbOptions fo = snb_options(cfg);
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const SNBSolution& s : find_snb(model, fo)) {
        folds.push_back({{"d_star", s.d_star},
                         {"D_star", s.D_star},
                         {"v_s_star", s.v_s_star},
                         {"method", to_string(s.method)},
                         {"m_a_used", s.m_a_used},
                         {"steady_residual", s.steady_residual},
                         {"fold_residual", s.fold_residual}});
    }
    report["snb"] = folds;

    const RampRequirement ramp = min_stabilizing_ramp(model, cfg.duty_grid);
    report["min_stabilizing_ramp"] = {{"m_a_min", ramp.m_a_min}, {"D_at_max", ramp.d_at_max / spec.T}};

    nlohmann::ordered_json closed = nlohmann::ordered_json::object();
    const bool sf = std::holds_alternative<StateFeedback>(spec.scheme);
    const bool cmc = std::holds_alternative<Cmc>(spec.scheme);
    if (sf || cmc) {
        const StateFeedbackClosedForm cf(spec);
        nlohmann::ordered_json entry;
        entry["critical_duty"] = cf.k_i() != 0.0 ? nlohmann::ordered_json(cf.critical_duty()) : nullptr;
        entry["ripple_ratio"] = cf.ripple_ratio();
        entry["valid"] = cf.critical_duty_valid() && cf.k_i() != 0.0;
        closed["state_feedback"] = entry;
    }
    if (cmc) {
        const CmcClosedForm c = closed_form_cmc(spec);
        closed["cmc"] = {{"duty", c.duty}, {"in_range", c.in_range}};
    }
    report["closed_form"] = closed;
    report["series_terms"] = cfg.series_terms;
    report["duty_grid"] = cfg.duty_grid;
    return report;
}

CsvTable splot_table(const RunConfig& cfg) {
    const HarmonicBalanceModel model = make_model(cfg);
    CsvTable t;
    t.header = {"D", "v_s_implied", "s_value", "m_a", "stable_hint"};
    const double m_a = cfg.converter.ramp_slope();
    for (const HBPoint& p : s_curve(model, plot_grid(cfg))) {
        t.rows.push_back({p.D, optional_cell(p.v_s_implied), optional_cell(p.s_value), m_a,
                          std::string(to_string(p.stable_hint))});
    }
    return t;
}

CsvTable lplot_table(const RunConfig& cfg) {
    const HarmonicBalanceModel model = make_model(cfg);
    const LoopGain& lg = model.loop_gain();
    if (!lg.loop) {
        detail::fail(ErrorCategory::critical, "InfiniteLoopGain",
                     "V_m = 0: the L-plot is undefined, use splot instead");
    }
    const DcGain dc = dc_gain(*lg.loop);
    CsvTable t;
    t.header = {"D", "v_s_implied", "l_value", "criterion", "stable_hint"};
    for (const HBPoint& p : s_curve(model, plot_grid(cfg))) {
        std::optional<double> l;
        std::optional<double> criterion;
        if (p.v_s_implied) {
            l = model.l_value(p.d, *p.v_s_implied);
            // T(0) scales with v_s along the branch.
            if (!dc.infinite) {
                criterion = dc.value * (*p.v_s_implied / cfg.converter.v_s) + 1.0;
            }
        }
        t.rows.push_back({p.D, optional_cell(p.v_s_implied), optional_cell(l), optional_cell(criterion),
                          std::string(to_string(p.stable_hint))});
    }
    return t;
}

std::vector<std::pair<SweepDirection, CsvTable>> sweep_tables(const RunConfig& cfg) {
    const SweepConfig& sc = cfg.sweep;
    if (!sc.v_s_min) {
        detail::fail(ErrorCategory::config, "SchemaError", "'sweep.v_s_min': missing required key");
    }
    if (!sc.v_s_max) {
        detail::fail(ErrorCategory::config, "SchemaError", "'sweep.v_s_max': missing required key");
    }
    SweepOptions so;
    so.settle_cycles = sc.settle_cycles;
    so.jump_threshold = sc.jump_threshold;

    std::vector<SweepDirection> dirs;
    if (sc.direction != "down") {
        dirs.push_back(SweepDirection::up);
    }
    if (sc.direction != "up") {
        dirs.push_back(SweepDirection::down);
    }

    std::vector<std::pair<SweepDirection, CsvTable>> out;
    for (SweepDirection dir : dirs) {
        const SweepResult r = sweep_hysteresis(cfg.converter, *sc.v_s_min, *sc.v_s_max, sc.steps, dir, so);
        const std::string name = dir == SweepDirection::up ? "up" : "down";
        CsvTable t;
        t.header = {"direction", "v_s", "v_o_avg", "duty", "classification", "jump"};
        for (const SweepRecord& rec : r.records) {
            long jump = 0;
            for (const JumpEdge& j : r.jumps) {
                if (j.v_s_to == rec.v_s) {
                    jump = 1;
                }
            }
            t.rows.push_back({name, rec.v_s, rec.v_o_avg, rec.duty, std::string(to_string(rec.classification)), jump});
        }
        out.emplace_back(dir, std::move(t));
    }
    return out;
}

CsvTable simulate_table(const RunConfig& cfg) {
    const SimulateConfig& sc = cfg.simulate;
    const Simulator sim(cfg.converter);
    Eigen::VectorXd x = sim.rest_state();
    if (sc.x0) {
        if (static_cast<int>(sc.x0->size()) != sim.system().state_dim()) {
            detail::fail(ErrorCategory::config, "SchemaError",
                         "'simulate.x0': expected " + std::to_string(sim.system().state_dim()) + " entries");
        }
        x = Eigen::Map<const Eigen::VectorXd>(sc.x0->data(), static_cast<Eigen::Index>(sc.x0->size()));
    }
    const int record = std::clamp(sc.record_cycles.value_or(sc.cycles), 0, sc.cycles);
    const double T = cfg.converter.T;

    CsvTable t;
    t.header = {"t", "i_L", "v_C", "y", "h", "stage"};
    for (int k = 0; k < sc.cycles; ++k) {
        if (k >= sc.cycles - record) {
            for (const TimeSample& s : sim.sample_cycle(x, sc.samples_per_cycle, k * T)) {
                t.rows.push_back(
                    {s.t, s.i_L, s.v_C, s.y, s.h, std::string(s.stage == Stage::S1 ? "S1" : "S2")});
            }
        }
        x = sim.cycle(x).x_end;
    }
    return t;
}

CsvTable boundary_table(const RunConfig& cfg) {
    if (!cfg.boundary.x) {
        detail::fail(ErrorCategory::config, "SchemaError", "'boundary.x': missing required key");
    }
    if (!cfg.boundary.y) {
        detail::fail(ErrorCategory::config, "SchemaError", "'boundary.y': missing required key");
    }
    CsvTable t;
    t.header = {"x", "y", "stable_side"};
    for (const BoundaryPoint& p : trace_boundary(cfg.converter, *cfg.boundary.x, *cfg.boundary.y, snb_options(cfg))) {
        t.rows.push_back({p.x, optional_cell(p.y), p.stable_side});
    }
    return t;
}

void run(const RunOptions& opts, std::ostream& out) {
    const RunConfig cfg = resolve(opts);
    switch (opts.command) {
    case Command::analyze:
        emit_text(analyze_report(cfg).dump(2) + "\n", opts.out, out);
        break;
    case Command::splot:
        emit_table(splot_table(cfg), opts.out, out);
        break;
    case Command::lplot:
        emit_table(lplot_table(cfg), opts.out, out);
        break;
    case Command::sweep: {
        const auto tables = sweep_tables(cfg);
        if (!opts.out) {
            CsvTable merged;
            for (const auto& [dir, table] : tables) {
                merged.header = table.header;
                merged.rows.insert(merged.rows.end(), table.rows.begin(), table.rows.end());
            }
            write_csv(merged, out);
        } else if (tables.size() == 1) {
            write_csv(tables.front().second, *opts.out);
        } else {
            for (const auto& [dir, table] : tables) {
                write_csv(table, with_suffix(*opts.out, dir == SweepDirection::up ? "_up" : "_down"));
            }
        }
        break;
    }
    case Command::simulate:
        emit_table(simulate_table(cfg), opts.out, out);
        break;
    case Command::boundary:
        emit_table(boundary_table(cfg), opts.out, out);
        break;
    }
}

int exit_code(ErrorCategory c) noexcept {
    return c == ErrorCategory::config || c == ErrorCategory::cli ? 2 : 3;
}

std::string error_json(const std::string& category, const std::string& kind, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = {{"category", category}, {"kind", kind}, {"message", message}};
    return j.dump();
}

int run_guarded(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        run(opts, out);
        return 0;
    } catch (const Error& e) {
        err << error_json(to_string(e.category()), e.kind(), e.what()) << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        err << error_json("internal", "Exception", e.what()) << '\n';
        return 3;
    }
}

} // namespace snb::cli
