#include "snb/cli/config.hpp"

#include "snb/error.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace snb::cli {

namespace {

[[noreturn]] void schema_error(const std::string& key, const std::string& msg) {
    detail::fail(ErrorCategory::config, "SchemaError", "'" + key + "': " + msg);
}

/// Typed access to one table; remembers which keys were consumed so the
/// leftovers can be rejected.
class TableReader {
public:
    TableReader(const Document& doc, std::string name) : name_(std::move(name)) {
        const auto it = doc.find(name_);
        if (it != doc.end()) {
            table_ = &it->second;
        }
    }

    [[nodiscard]] bool present() const noexcept { return table_ != nullptr; }

    [[nodiscard]] std::string qualified(const std::string& key) const {
        return name_.empty() ? key : name_ + "." + key;
    }

    [[nodiscard]] const Entry* find(const std::string& key) {
        used_.insert(key);
        if (!table_) {
            return nullptr;
        }
        const auto it = table_->find(key);
        return it == table_->end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::optional<double> number(const std::string& key) {
        const Entry* e = find(key);
        if (!e) {
            return std::nullopt;
        }
        if (const auto* v = std::get_if<double>(&e->value)) {
            return *v;
        }
        schema_error(qualified(key), "expected a number" + where(*e));
    }

    [[nodiscard]] double required(const std::string& key) {
        const auto v = number(key);
        if (!v) {
            schema_error(qualified(key), "missing required key");
        }
        return *v;
    }

    [[nodiscard]] std::optional<int> integer(const std::string& key) {
        const auto v = number(key);
        if (!v) {
            return std::nullopt;
        }
        if (std::floor(*v) != *v || std::abs(*v) > 2e9) {
            schema_error(qualified(key), "expected an integer");
        }
        return static_cast<int>(*v);
    }

    [[nodiscard]] std::optional<std::string> string(const std::string& key) {
        const Entry* e = find(key);
        if (!e) {
            return std::nullopt;
        }
        if (const auto* v = std::get_if<std::string>(&e->value)) {
            return *v;
        }
        schema_error(qualified(key), "expected a string" + where(*e));
    }

    [[nodiscard]] std::optional<std::vector<double>> array(const std::string& key) {
        const Entry* e = find(key);
        if (!e) {
            return std::nullopt;
        }
        if (const auto* v = std::get_if<std::vector<double>>(&e->value)) {
            return *v;
        }
        schema_error(qualified(key), "expected an array of numbers" + where(*e));
    }

    void reject_unknown() const {
        if (!table_) {
            return;
        }
        for (const auto& [key, entry] : *table_) {
            if (!used_.count(key)) {
                schema_error(qualified(key), "unknown key" + where(entry));
            }
        }
    }

private:
    static std::string where(const Entry& e) {
        return e.line > 0 ? " (line " + std::to_string(e.line) + ")" : "";
    }

    std::string name_;
    const Table* table_ = nullptr;
    std::set<std::string> used_;
};

TransferFunction read_tf(TableReader& t, const std::string& num_key, const std::string& den_key) {
    const auto num = t.array(num_key);
    const auto den = t.array(den_key);
    if (!num) {
        schema_error(t.qualified(num_key), "missing required key");
    }
    if (!den) {
        schema_error(t.qualified(den_key), "missing required key");
    }
    const auto to_coeffs = [](const std::vector<double>& v) {
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };
    try {
        return TransferFunction(to_coeffs(*num), to_coeffs(*den));
    } catch (const Error& e) {
        detail::fail(ErrorCategory::config, e.kind().c_str(), t.qualified(num_key) + ": " + e.what());
    }
}

ControlScheme read_control(TableReader& t) {
    if (!t.present()) {
        schema_error("control", "missing required table");
    }
    const auto scheme = t.string("scheme");
    if (!scheme) {
        schema_error("control.scheme", "missing required key");
    }
    if (*scheme == "state_feedback") {
        return StateFeedback{t.required("k_i"), t.required("k_v")};
    }
    if (*scheme == "cmc") {
        return Cmc{};
    }
    if (*scheme == "vmc") {
        return Vmc{read_tf(t, "gc_num", "gc_den")};
    }
    if (*scheme == "custom") {
        Custom c{read_tf(t, "f_num", "f_den"), t.number("dc_offset_gain").value_or(1.0)};
        return c;
    }
    schema_error("control.scheme", "unknown scheme '" + *scheme + "' (state_feedback, cmc, vmc, custom)");
}

ConverterSpec read_converter(TableReader& t) {
    if (!t.present()) {
        schema_error("converter", "missing required table");
    }
    ConverterSpec spec;
    spec.v_s = t.required("v_s");
    spec.R = t.required("R");
    spec.L = t.required("L");
    spec.C = t.required("C");
    spec.R_c = t.number("R_c").value_or(0.0);
    const auto T = t.number("T");
    const auto f = t.number("f_s_hz");
    if (T && f) {
        schema_error("converter.T", "give either T or f_s_hz, not both");
    }
    if (!T && !f) {
        schema_error("converter.T", "missing required key (or f_s_hz)");
    }
    if (f) {
        if (!(*f > 0.0)) {
            schema_error("converter.f_s_hz", "must be > 0");
        }
        spec.T = 1.0 / *f;
    } else {
        spec.T = *T;
    }
    spec.V_m = t.required("V_m");
    spec.v_r = t.required("v_r");
    return spec;
}

std::optional<SweepAxis> read_axis(TableReader& t, const std::string& axis) {
    const auto name = t.string(axis);
    const auto lo = t.number(axis + "_min");
    const auto hi = t.number(axis + "_max");
    const auto points = t.integer(axis + "_points");
    if (!name) {
        if (lo || hi || points) {
            schema_error(t.qualified(axis), "missing parameter name for the axis");
        }
        return std::nullopt;
    }
    if (!lo || !hi) {
        schema_error(t.qualified(axis + (lo ? "_max" : "_min")), "missing required key");
    }
    SweepAxis a{*name, *lo, *hi, points.value_or(20)};
    if (a.points < 2) {
        schema_error(t.qualified(axis + "_points"), "must be >= 2");
    }
    return a;
}

} // namespace

RunConfig parse_config(const Document& doc) {
    static const std::set<std::string> known{"converter", "control", "analysis", "plot", "sweep", "simulate", "boundary"};
    for (const auto& [name, table] : doc) {
        if (name.empty()) {
            if (!table.empty()) {
                schema_error(table.begin()->first, "keys must live inside a table such as [converter]");
            }
        } else if (!known.count(name)) {
            schema_error(name, "unknown table");
        }
    }

    RunConfig cfg;

    TableReader conv(doc, "converter");
    cfg.converter = read_converter(conv);
    conv.reject_unknown();

    TableReader ctrl(doc, "control");
    cfg.converter.scheme = read_control(ctrl);
    ctrl.reject_unknown();

    cfg.converter.validate();

    TableReader analysis(doc, "analysis");
    if (const auto n = analysis.integer("series_terms")) {
        cfg.series_terms = *n;
    }
    cfg.duty_grid = analysis.integer("duty_grid").value_or(cfg.duty_grid);
    analysis.reject_unknown();

    TableReader plot(doc, "plot");
    cfg.plot.D_min = plot.number("D_min").value_or(0.0);
    cfg.plot.D_max = plot.number("D_max").value_or(1.0);
    cfg.plot.points = plot.integer("points");
    plot.reject_unknown();
    if (!(cfg.plot.D_min >= 0.0 && cfg.plot.D_max <= 1.0 && cfg.plot.D_max > cfg.plot.D_min)) {
        schema_error("plot.D_min", "need 0 <= D_min < D_max <= 1");
    }

    TableReader sweep(doc, "sweep");
    cfg.sweep.v_s_min = sweep.number("v_s_min");
    cfg.sweep.v_s_max = sweep.number("v_s_max");
    cfg.sweep.steps = sweep.integer("steps").value_or(cfg.sweep.steps);
    cfg.sweep.settle_cycles = sweep.integer("settle_cycles").value_or(cfg.sweep.settle_cycles);
    cfg.sweep.direction = sweep.string("direction").value_or(cfg.sweep.direction);
    cfg.sweep.jump_threshold = sweep.number("jump_threshold").value_or(cfg.sweep.jump_threshold);
    sweep.reject_unknown();
    if (cfg.sweep.direction != "up" && cfg.sweep.direction != "down" && cfg.sweep.direction != "both") {
        schema_error("sweep.direction", "expected \"up\", \"down\" or \"both\"");
    }
    if (cfg.sweep.settle_cycles < 0) {
        schema_error("sweep.settle_cycles", "must be >= 0");
    }

    TableReader sim(doc, "simulate");
    cfg.simulate.cycles = sim.integer("cycles").value_or(cfg.simulate.cycles);
    cfg.simulate.samples_per_cycle = sim.integer("samples_per_cycle").value_or(cfg.simulate.samples_per_cycle);
    cfg.simulate.record_cycles = sim.integer("record_cycles");
    cfg.simulate.x0 = sim.array("x0");
    sim.reject_unknown();
    if (cfg.simulate.cycles < 1) {
        schema_error("simulate.cycles", "must be >= 1");
    }
    if (cfg.simulate.samples_per_cycle < 1) {
        schema_error("simulate.samples_per_cycle", "must be >= 1");
    }

    TableReader boundary(doc, "boundary");
    cfg.boundary.x = read_axis(boundary, "x");
    cfg.boundary.y = read_axis(boundary, "y");
    boundary.reject_unknown();

    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        detail::fail(ErrorCategory::config, "IOError", "cannot open config file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(parse_document(buf.str()));
}

} // namespace snb::cli
