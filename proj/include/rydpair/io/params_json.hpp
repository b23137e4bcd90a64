#ifndef RYDPAIR_IO_PARAMS_JSON_HPP
#define RYDPAIR_IO_PARAMS_JSON_HPP

#include <cmath>
#include <optional>
#include <string>

#include <json.hpp>

#include <rydpair/ensemble.hpp>
#include <rydpair/validity.hpp>

/*
 * JSON form of PhysicalParams. Canonical keys are SI with angular rates.
 * For hand-written configs `<rate>_hz` keys take ordinary frequencies
 * (multiplied by 2 pi) and `c3_ghz_um3` takes C3 in GHz um^3 (2 pi-free).
 */

namespace rydpair::io {

using json = nlohmann::json;

inline json geometry_to_json(const Geometry& g)
{
    struct
    {
        json operator()(const Segment& s) const
        {
            return {{"type", "segment"}, {"length", s.length}, {"cross_section", s.cross_section}};
        }
        json operator()(const Box& b) const { return {{"type", "box"}, {"lx", b.lx}, {"ly", b.ly}, {"lz", b.lz}}; }
        json operator()(const Cylinder& c) const
        {
            return {{"type", "cylinder"}, {"radius", c.radius}, {"length", c.length}};
        }
    } visitor;
    return std::visit(visitor, g);
}

inline Geometry geometry_from_json(const json& j)
{
    const std::string type = j.at("type").get<std::string>();
    if (type == "segment") return Segment{j.at("length").get<double>(), j.value("cross_section", 1.0)};
    if (type == "box") return Box{j.at("lx").get<double>(), j.at("ly").get<double>(), j.at("lz").get<double>()};
    if (type == "cylinder") return Cylinder{j.at("radius").get<double>(), j.at("length").get<double>()};
    throw InvalidInput("unknown geometry type '" + type + "'");
}

inline json params_to_json(const PhysicalParams& p)
{
    return {{"omega_p0", p.omega_p0},   {"omega_c", p.omega_c},     {"gamma_e", p.gamma_e},
            {"alpha", p.alpha},         {"length_L", p.length_L},   {"c3", p.c3},
            {"storage_T", p.storage_T}, {"density_n", p.density_n}, {"omega_rf", p.omega_rf},
            {"geometry", geometry_to_json(p.geometry)}};
}

/* Applies the keys present in `j` on top of `base`. Unknown keys are rejected. */
inline PhysicalParams params_from_json(const json& j, PhysicalParams base = {})
{
    if (!j.is_object()) throw InvalidInput("params must be a JSON object");
    std::optional<double> epsilon;
    for (const auto& [key, value] : j.items()) {
        auto num = [&]() {
            if (!value.is_number()) throw InvalidInput("params." + key + " must be a number");
            return value.get<double>();
        };
        if (key == "omega_p0") base.omega_p0 = num();
        else if (key == "omega_c") base.omega_c = num();
        else if (key == "gamma_e") base.gamma_e = num();
        else if (key == "omega_rf") base.omega_rf = num();
        else if (key == "omega_p0_hz") base.omega_p0 = two_pi * num();
        else if (key == "omega_c_hz") base.omega_c = two_pi * num();
        else if (key == "gamma_e_hz") base.gamma_e = two_pi * num();
        else if (key == "omega_rf_hz") base.omega_rf = two_pi * num();
        else if (key == "epsilon") epsilon = num();
        else if (key == "alpha") base.alpha = num();
        else if (key == "length_L") base.length_L = num();
        else if (key == "c3") base.c3 = num();
        else if (key == "c3_ghz_um3") base.c3 = num() * 1e9 * 1e-18;
        else if (key == "storage_T") base.storage_T = num();
        else if (key == "density_n") base.density_n = num();
        else if (key == "geometry") base.geometry = geometry_from_json(value);
        else throw InvalidInput("unknown parameter '" + key + "'");
    }
    // keys arrive sorted, so the probe ratio is applied once omega_c is final
    if (epsilon) base.omega_p0 = *epsilon * base.omega_c;
    validate(base);
    return base;
}

inline json derived_to_json(const DerivedParams& d)
{
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"norm_A", d.norm_A},
            {"v_g0", d.v_g0},
            {"r_c", d.r_c},
            {"n_ry", d.n_ry},
            {"r_ry", finite_or_null(d.r_ry)},
            {"t_max", finite_or_null(d.t_max)},
            {"loss_length", d.loss_length},
            {"loss_delay", d.loss_delay}};
}

inline json regime_to_json(const RegimeReport& r)
{
    json tau_ok = json::array();
    for (auto ok : r.tau_loss_ok) tau_ok.push_back(ok != 0);
    return {{"n_ry_rc3", {{"value", r.n_ry_rc3}, {"ok", r.n_ry_rc3_ok}}},
            {"rc_over_rry", {{"value", r.rc_over_rry}, {"ok", r.rc_over_rry_ok}}},
            {"t_over_tmax", {{"value", r.t_over_tmax}, {"ok", r.t_over_tmax_ok}}},
            {"rf_margin", {{"value", r.rf_margin}, {"distance", r.rf_distance}, {"ok", r.rf_margin_ok}}},
            {"norm_defect",
             {{"first", r.norm_defect.first}, {"second", r.norm_defect.second}, {"ok", r.norm_defect_ok}}},
            {"tau_loss", {{"loss_delay", r.loss_delay}, {"ok", tau_ok}, {"all_ok", r.tau_loss_all_ok}}},
            {"hard_failure", r.hard_failure()}};
}

} // namespace rydpair::io

#endif
