#include "snb/converter.hpp"

#include <cmath>
#include <string>

namespace snb {

namespace {

void require(bool ok, const char* key, const char* what) {
    if (!ok) {
        detail::fail(ErrorCategory::config, "InvariantViolation",
                     std::string(key) + " " + what);
    }
}

} // namespace

double ConverterSpec::ramp(double t) const noexcept {
    const double x = t / T;
    return V_m * (x - std::floor(x));
}

void ConverterSpec::validate() const {
    require(std::isfinite(v_s), "v_s", "must be finite");
    require(std::isfinite(v_r), "v_r", "must be finite");
    require(R > 0.0 && std::isfinite(R), "R", "must be positive");
    require(L > 0.0 && std::isfinite(L), "L", "must be positive");
    require(C > 0.0 && std::isfinite(C), "C", "must be positive");
    require(T > 0.0 && std::isfinite(T), "T", "must be positive");
    require(R_c >= 0.0 && std::isfinite(R_c), "R_c", "must be non-negative");
    require(V_m >= 0.0 && std::isfinite(V_m), "V_m", "must be non-negative");
}

TransferFunction make_power_stage(const ConverterSpec& spec, PowerStageOutput output) {
    const double rho = spec.rho();
    Eigen::Vector3d den(1.0, spec.L / spec.R + spec.R_c * spec.C, spec.L * spec.C / rho);
    Eigen::Vector2d num;
    if (output == PowerStageOutput::vo) {
        num << 1.0, spec.R_c * spec.C;
    } else {
        num << 1.0 / spec.R, spec.C / rho;
    }
    return {num, den};
}

LoopGain build_loop_gain(const ConverterSpec& spec) {
    spec.validate();
    LoopGain out;
    std::visit(
        [&](const auto& scheme) {
            using S = std::decay_t<decltype(scheme)>;
            if constexpr (std::is_same_v<S, Vmc>) {
                const DcGain gc0 = dc_gain(scheme.gc);
                if (gc0.infinite) {
                    detail::fail(ErrorCategory::tf_core, "IntegratingCompensator",
                                 "G_c(0) is infinite; integrating compensators are not supported");
                }
                out.G = make_power_stage(spec, PowerStageOutput::vo) * scheme.gc;
                out.offset_gain = gc0.value;
            } else if constexpr (std::is_same_v<S, Cmc>) {
                out.G = make_power_stage(spec, PowerStageOutput::iL);
                out.offset_gain = 1.0;
            } else if constexpr (std::is_same_v<S, StateFeedback>) {
                out.G = scheme.k_i * make_power_stage(spec, PowerStageOutput::iL) +
                        scheme.k_v * make_power_stage(spec, PowerStageOutput::vo);
                out.offset_gain = 1.0;
            } else {
                out.G = scheme.f;
                out.offset_gain = scheme.dc_offset_gain;
            }
        },
        spec.scheme);
    if (spec.V_m > 0.0) {
        out.loop = (spec.v_s / spec.V_m) * out.G;
    }
    return out;
}

} // namespace snb
