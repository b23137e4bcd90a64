#ifndef RYDPAIR_VALIDITY_HPP
#define RYDPAIR_VALIDITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <rydpair/common.hpp>
#include <rydpair/detail/oscillatory.hpp>
#include <rydpair/ensemble.hpp>

namespace rydpair {

struct VolumeIntegral
{
    double integral = 0.0;
    /* integral / ((2/3) pi^2 C3 T) */
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double error = 0.0;
    bool converged = true;
};

/**
 * 4 pi * integral r^2 (1 - cos[C3 T / r^3]) dr in the scaled radius r / r_c.
 * Up to `cutoff` the integral is done by panels; beyond it by the two
 * leading terms of the small-phase expansion.
 */
inline VolumeIntegral volume_integral_check(double storage_T, double c3, const detail::QuadratureOptions& opt = {},
                                            double cutoff = 20.0)
{
    if (!(storage_T >= 0.0) || !(c3 >= 0.0)) throw InvalidInput("volume_integral_check: negative input");
    VolumeIntegral out;
    const double scale = c3 * storage_T;
    if (scale == 0.0) {
        out.integral = 0.0;
        return out;
    }
    auto g = [](double x) { return x * x; };
    auto dg = [](double x) { return 2.0 * x; };
    const auto inner = detail::bracket_integral(g, dg, 0.1, 0.0, cutoff, opt);
    const double c3x = cutoff * cutoff * cutoff;
    const double tail = 1.0 / (6.0 * c3x) - 1.0 / (216.0 * c3x * c3x * c3x);
    const double scaled = -inner.value.real() + tail;
    out.integral = 4.0 * pi * scale * scaled;
    out.ratio = out.integral / (2.0 / 3.0 * pi * pi * scale);
    out.error = 4.0 * pi * scale * inner.error;
    out.converged = inner.error < 1e-8;
    return out;
}

struct SinVolumeIntegral
{
    double value = 0.0;
    /* value / r_c^3 */
    double in_rc3 = 0.0;
    double cutoff = 0.0;
};

/* 4 pi * integral_0^R r^2 sin[C3 T / r^3] dr; divergent as R grows, so R is mandatory. */
inline SinVolumeIntegral sin_volume_integral(double storage_T, double c3, double cutoff,
                                             const detail::QuadratureOptions& opt = {})
{
    if (!(storage_T > 0.0) || !(c3 > 0.0) || !(cutoff > 0.0)) throw InvalidInput("sin_volume_integral: bad input");
    const double rc3 = c3 * storage_T;
    const double x = cutoff / std::cbrt(rc3);
    auto g = [](double t) { return t * t; };
    auto dg = [](double t) { return 2.0 * t; };
    const auto r = detail::bracket_integral(g, dg, std::min(0.1, x), 0.0, x, opt);
    SinVolumeIntegral out;
    out.in_rc3 = -4.0 * pi * r.value.imag();
    out.value = out.in_rc3 * rc3;
    out.cutoff = cutoff;
    return out;
}

struct NormDefect
{
    /* (n_ry r_c^3)^2 (n_ry V) */
    double first = 0.0;
    /* (n_ry r_c^3)^2 (n_ry V)^2 */
    double second = 0.0;
    bool first_ok = true;
    bool second_ok = true;
};

inline NormDefect norm_defect_estimate(double n_ry_rc3, double n_ry_volume, double threshold = 0.1)
{
    if (!(n_ry_rc3 >= 0.0) || !(n_ry_volume >= 0.0)) throw InvalidInput("norm_defect_estimate: negative input");
    NormDefect out;
    const double base = n_ry_rc3 * n_ry_rc3;
    out.first = base * n_ry_volume;
    out.second = base * n_ry_volume * n_ry_volume;
    out.first_ok = out.first <= threshold;
    out.second_ok = out.second <= threshold;
    return out;
}

inline NormDefect norm_defect_estimate(const PhysicalParams& p, double cloud_volume, double threshold = 0.1)
{
    if (!(cloud_volume > 0.0)) throw InvalidInput("norm_defect_estimate: volume must be positive");
    const DerivedParams d = derive_params(p);
    return norm_defect_estimate(d.n_ry * d.r_c * d.r_c * d.r_c, d.n_ry * cloud_volume, threshold);
}

struct RegimeThresholds
{
    double small = 0.1;
    double rc_over_rry_max = 1.0;
    double t_over_tmax_max = 1.0;
    double rf_margin_min = 1.0;
    double norm_defect_max = 0.1;
    /* relative slack on the loss-delay condition */
    double tau_tolerance = 0.05;
};

struct RegimeReport
{
    double n_ry_rc3 = 0.0;
    double rc_over_rry = 0.0;
    double t_over_tmax = 0.0;
    double rf_margin = 0.0;
    /* distance at which rf_margin was evaluated (m) */
    double rf_distance = 0.0;
    double loss_delay = 0.0;
    std::vector<double> tau;
    std::vector<std::uint8_t> tau_loss_ok;
    NormDefect norm_defect{};

    bool n_ry_rc3_ok = true;
    bool rc_over_rry_ok = true;
    bool t_over_tmax_ok = true;
    bool rf_margin_ok = true;
    bool norm_defect_ok = true;
    bool tau_loss_all_ok = true;

    /* conditions on which the pair description itself rests */
    bool hard_failure() const
    {
        return !(n_ry_rc3_ok && rc_over_rry_ok && t_over_tmax_ok && rf_margin_ok && norm_defect_ok);
    }
};

/**
 * Evaluates the applicability conditions. rf_margin is Omega_rf / V(r) at
 * the shortest relevant distance: v_g0 * min(tau) when a tau grid is
 * given, r_c otherwise. The loss-delay condition is advisory.
 */
inline RegimeReport regime_check(const PhysicalParams& p, const std::vector<double>& tau_grid = {},
                                 const RegimeThresholds& th = {})
{
    const DerivedParams d = derive_params(p);
    RegimeReport r;
    r.n_ry_rc3 = d.n_ry * d.r_c * d.r_c * d.r_c;
    r.rc_over_rry = std::isfinite(d.r_ry) ? d.r_c / d.r_ry : 0.0;
    r.t_over_tmax = std::isfinite(d.t_max) ? p.storage_T / d.t_max : 0.0;

    r.rf_distance = d.r_c;
    if (!tau_grid.empty()) r.rf_distance = d.v_g0 * *std::min_element(tau_grid.begin(), tau_grid.end());
    if (!(r.rf_distance > 0.0)) throw InvalidInput("regime_check: tau values must be positive");
    r.rf_margin = p.omega_rf / rddi_potential(r.rf_distance, p.c3);

    r.loss_delay = d.loss_delay;
    r.tau = tau_grid;
    for (double tau : tau_grid) {
        const bool ok = tau >= (1.0 - th.tau_tolerance) * d.loss_delay;
        r.tau_loss_ok.push_back(ok ? 1 : 0);
        r.tau_loss_all_ok = r.tau_loss_all_ok && ok;
    }
    r.norm_defect = norm_defect_estimate(r.n_ry_rc3, d.n_ry * geometry_volume(p.geometry), th.norm_defect_max);

    r.n_ry_rc3_ok = r.n_ry_rc3 <= th.small;
    r.rc_over_rry_ok = r.rc_over_rry <= th.rc_over_rry_max;
    r.t_over_tmax_ok = r.t_over_tmax <= th.t_over_tmax_max;
    r.rf_margin_ok = r.rf_margin > th.rf_margin_min;
    r.norm_defect_ok = r.norm_defect.first_ok && r.norm_defect.second_ok;
    return r;
}

} // namespace rydpair

#endif
