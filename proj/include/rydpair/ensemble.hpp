#ifndef RYDPAIR_ENSEMBLE_HPP
#define RYDPAIR_ENSEMBLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include <rydpair/common.hpp>

namespace rydpair {

/* Thin medium along z; positions are sampled on the axis. */
struct Segment
{
    double length = 1.0;
    /* effective cross-section, used only to turn volume density into a line density */
    double cross_section = 1.0;
};

/* [0, lx] x [0, ly] x [0, lz] */
struct Box
{
    double lx = 1.0;
    double ly = 1.0;
    double lz = 1.0;
};

/* axis along z, base at z = 0, centred on x = y = 0 */
struct Cylinder
{
    double radius = 1.0;
    double length = 1.0;
};

using Geometry = std::variant<Segment, Box, Cylinder>;

enum class DimMode { full_3d, reduced_1d };

inline DimMode dim_mode(const Geometry& geometry)
{
    return std::holds_alternative<Segment>(geometry) ? DimMode::reduced_1d : DimMode::full_3d;
}

inline double geometry_volume(const Geometry& geometry)
{
    struct
    {
        double operator()(const Segment& s) const { return s.length * s.cross_section; }
        double operator()(const Box& b) const { return b.lx * b.ly * b.lz; }
        double operator()(const Cylinder& c) const { return pi * c.radius * c.radius * c.length; }
    } visitor;
    return std::visit(visitor, geometry);
}

/* Extent along the propagation axis z. */
inline double geometry_length(const Geometry& geometry)
{
    struct
    {
        double operator()(const Segment& s) const { return s.length; }
        double operator()(const Box& b) const { return b.lz; }
        double operator()(const Cylinder& c) const { return c.length; }
    } visitor;
    return std::visit(visitor, geometry);
}

/* Largest transverse separation two atoms of the cloud can have. */
inline double transverse_width(const Geometry& geometry)
{
    struct
    {
        double operator()(const Segment&) const { return 0.0; }
        double operator()(const Box& b) const { return std::hypot(b.lx, b.ly); }
        double operator()(const Cylinder& c) const { return 2.0 * c.radius; }
    } visitor;
    return std::visit(visitor, geometry);
}

/**
 * Experiment-level inputs, SI units. Rabi frequencies and rates are angular
 * (rad/s). c3 is the interaction coefficient in rad/s * m^3, i.e. the
 * potential C3/r^3 is an angular frequency.
 */
struct PhysicalParams
{
    double omega_p0 = 0.0;
    double omega_c = 1.0;
    double gamma_e = 1.0;
    double alpha = 1.0;
    double length_L = 1.0;
    double c3 = 1.0;
    double storage_T = 1.0;
    double density_n = 1.0;
    double omega_rf = 1.0;
    Geometry geometry = Segment{};
};

inline void validate(const PhysicalParams& p)
{
    auto positive = [](double value, const char* name) {
        if (!(value > 0.0) || !std::isfinite(value))
            throw InvalidInput(std::string(name) + " must be strictly positive and finite");
    };
    positive(p.omega_c, "omega_c");
    positive(p.gamma_e, "gamma_e");
    positive(p.alpha, "alpha");
    positive(p.length_L, "length_L");
    positive(p.c3, "c3");
    positive(p.storage_T, "storage_T");
    positive(p.density_n, "density_n");
    positive(p.omega_rf, "omega_rf");
    if (!(p.omega_p0 >= 0.0) || !std::isfinite(p.omega_p0))
        throw InvalidInput("omega_p0 must be non-negative and finite");
    if (!(p.omega_p0 < p.omega_c))
        throw InvalidInput("weak-probe regime requires omega_p0 < omega_c");
    if (!(geometry_volume(p.geometry) > 0.0) || !(geometry_length(p.geometry) > 0.0))
        throw InvalidInput("geometry must have positive extent");
}

inline double probe_ratio(const PhysicalParams& p) { return p.omega_p0 / p.omega_c; }

/* Dark-state normalization (1 + eps^2)^(-1/2). */
inline double dark_state_norm(double epsilon) { return 1.0 / std::sqrt(1.0 + epsilon * epsilon); }

struct DerivedParams
{
    double norm_A = 1.0;
    double v_g0 = 0.0;
    double r_c = 0.0;
    double n_ry = 0.0;
    double r_ry = std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();
    double loss_length = 0.0;
    double loss_delay = 0.0;
};

inline DerivedParams derive_params(const PhysicalParams& p)
{
    validate(p);
    const double eps = probe_ratio(p);
    DerivedParams d;
    d.norm_A = dark_state_norm(eps);
    d.v_g0 = p.omega_c * p.omega_c * p.length_L / (p.gamma_e * p.alpha);
    d.r_c = std::cbrt(p.c3 * p.storage_T);
    d.n_ry = d.norm_A * d.norm_A * eps * eps * p.density_n;
    if (d.n_ry > 0.0) {
        d.r_ry = std::cbrt(1.0 / d.n_ry);
        d.t_max = 1.0 / (p.c3 * d.n_ry);
    }
    d.loss_length = p.length_L / std::sqrt(p.alpha);
    d.loss_delay = p.gamma_e * std::sqrt(p.alpha) / (p.omega_c * p.omega_c);
    return d;
}

/**
 * Coefficient and storage time of the exchange interaction. Any consistent
 * unit system works; Interaction{} is the protocol system in which
 * r_c = 1 and T = 1, so the accumulated phase is 1/r^3.
 */
struct Interaction
{
    double c3 = 1.0;
    double storage_T = 1.0;

    /* V(r) T */
    double phase(double r) const
    {
        if (!(r > 0.0)) throw InvalidInput("interaction distance must be positive");
        return c3 * storage_T / (r * r * r);
    }

    double characteristic_radius() const { return std::cbrt(c3 * storage_T); }
};

/* V(r) = C3 / r^3. Self-interaction (r = 0) is excluded. */
inline double rddi_potential(double r, double c3)
{
    if (!(r > 0.0)) throw InvalidInput("rddi_potential: distance must be positive");
    return c3 / (r * r * r);
}

/* Maps SI lengths and times to protocol units (r_c = 1, T = 1). */
struct ProtocolUnits
{
    double length_scale = 1.0; // r_c in metres
    double time_scale = 1.0;   // T in seconds

    static ProtocolUnits from(const PhysicalParams& p)
    {
        return {std::cbrt(p.c3 * p.storage_T), p.storage_T};
    }

    double length(double metres) const { return metres / length_scale; }
    double to_metres(double protocol_length) const { return protocol_length * length_scale; }
};

struct AtomCloud
{
    std::vector<Eigen::Vector3d> positions;
    DimMode dim_mode = DimMode::reduced_1d;
    std::uint64_t seed = 0;

    std::size_t size() const { return positions.size(); }

    double distance(std::size_t i, std::size_t j) const
    {
        return (positions[i] - positions[j]).norm();
    }
};

inline AtomCloud cloud_from_z(const std::vector<double>& z, std::uint64_t seed = 0)
{
    AtomCloud cloud;
    cloud.dim_mode = DimMode::reduced_1d;
    cloud.seed = seed;
    cloud.positions.reserve(z.size());
    for (double zi : z) cloud.positions.emplace_back(0.0, 0.0, zi);
    return cloud;
}

inline AtomCloud scaled(const AtomCloud& cloud, double factor)
{
    AtomCloud out = cloud;
    for (auto& r : out.positions) r *= factor;
    return out;
}

inline AtomCloud to_protocol(const AtomCloud& cloud, const ProtocolUnits& units)
{
    return scaled(cloud, 1.0 / units.length_scale);
}

/* Mean number of atoms implied by density and geometry. */
inline double expected_atom_count(const PhysicalParams& p)
{
    return p.density_n * geometry_volume(p.geometry);
}

struct SamplingOptions
{
    std::size_t max_count = 10'000'000;
};

namespace detail {

inline Eigen::Vector3d sample_point(const Geometry& geometry, Rng& rng)
{
    struct
    {
        Rng& rng;
        Eigen::Vector3d operator()(const Segment& s) const { return {0.0, 0.0, rng.uniform(0.0, s.length)}; }
        Eigen::Vector3d operator()(const Box& b) const
        {
            const double x = rng.uniform(0.0, b.lx);
            const double y = rng.uniform(0.0, b.ly);
            const double z = rng.uniform(0.0, b.lz);
            return {x, y, z};
        }
        Eigen::Vector3d operator()(const Cylinder& c) const
        {
            const double rho = c.radius * std::sqrt(rng.uniform());
            const double phi = two_pi * rng.uniform();
            const double z = rng.uniform(0.0, c.length);
            return {rho * std::cos(phi), rho * std::sin(phi), z};
        }
    } visitor{rng};
    return std::visit(visitor, geometry);
}

} // namespace detail

inline bool inside(const Geometry& geometry, const Eigen::Vector3d& r)
{
    struct
    {
        const Eigen::Vector3d& r;
        bool operator()(const Segment& s) const
        {
            return r.x() == 0.0 && r.y() == 0.0 && r.z() >= 0.0 && r.z() <= s.length;
        }
        bool operator()(const Box& b) const
        {
            return r.x() >= 0.0 && r.x() <= b.lx && r.y() >= 0.0 && r.y() <= b.ly && r.z() >= 0.0 &&
                   r.z() <= b.lz;
        }
        bool operator()(const Cylinder& c) const
        {
            return std::hypot(r.x(), r.y()) <= c.radius && r.z() >= 0.0 && r.z() <= c.length;
        }
    } visitor{r};
    return std::visit(visitor, geometry);
}

/**
 * Draws `count` i.i.d. uniform positions inside `geometry`. Coincident
 * draws are redrawn so positions stay pairwise distinct.
 */
inline AtomCloud sample_cloud(const Geometry& geometry, std::size_t count, std::uint64_t seed,
                              const SamplingOptions& options = {})
{
    if (count < 1) throw InvalidInput("sample_cloud: count must be at least 1");
    if (count > options.max_count) throw InvalidInput("sample_cloud: count exceeds the memory cap");
    if (!(geometry_volume(geometry) > 0.0)) throw InvalidInput("sample_cloud: empty geometry");

    AtomCloud cloud;
    cloud.dim_mode = dim_mode(geometry);
    cloud.seed = seed;
    cloud.positions.reserve(count);
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) cloud.positions.push_back(detail::sample_point(geometry, rng));

    // duplicates are astronomically rare; resolve them deterministically anyway
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    auto less = [&](std::size_t a, std::size_t b) {
        const auto& pa = cloud.positions[a];
        const auto& pb = cloud.positions[b];
        return std::tie(pa.z(), pa.y(), pa.x()) < std::tie(pb.z(), pb.y(), pb.x());
    };
    for (int pass = 0; pass < 16; ++pass) {
        std::sort(order.begin(), order.end(), less);
        bool clean = true;
        for (std::size_t k = 1; k < count; ++k) {
            if (cloud.positions[order[k]] == cloud.positions[order[k - 1]]) {
                cloud.positions[order[k]] = detail::sample_point(geometry, rng);
                clean = false;
            }
        }
        if (clean) return cloud;
    }
    throw InvalidInput("sample_cloud: could not draw distinct positions");
}

inline AtomCloud sample_cloud(const PhysicalParams& p, std::size_t count, std::uint64_t seed,
                              const SamplingOptions& options = {})
{
    return sample_cloud(p.geometry, count, seed, options);
}

/* Linear Rydberg density times r_c for a 1D cloud, n_ry r_c^3 for a 3D one. */
inline double rydberg_packing(const AtomCloud& cloud, double extent, double epsilon,
                              const Interaction& interaction = {})
{
    const double A = dark_state_norm(epsilon);
    const double rc = interaction.characteristic_radius();
    const double density = static_cast<double>(cloud.size()) / extent;
    const double scale = cloud.dim_mode == DimMode::reduced_1d ? rc : rc * rc * rc;
    return A * A * epsilon * epsilon * density * scale;
}

/* Built-in parameter sets. */
namespace presets {

/**
 * 87Rb ladder scheme at principal quantum number ~100. Probe ratio and
 * density are not fixed by the source numbers; they are chosen so that
 * n_ry r_c^3 ~ 0.05 sits inside the pair-approximation regime.
 */
inline PhysicalParams rb87_sec5()
{
    PhysicalParams p;
    p.gamma_e = two_pi * 6.0e6;
    p.omega_c = two_pi * 2.0e6;
    p.omega_p0 = 0.1 * p.omega_c;
    p.alpha = 30.0;
    p.length_L = 1.0e-3;
    p.c3 = 610.0e9 * 1.0e-18; // 610 GHz um^3, 2pi-free
    p.storage_T = 10.0e-6;
    p.density_n = 8.0e11;
    p.omega_rf = two_pi * 100.0e6;
    p.geometry = Segment{1.0e-3, pi * 20.0e-6 * 20.0e-6};
    return p;
}

inline std::vector<std::string> names() { return {"rb87-sec5"}; }

inline PhysicalParams by_name(const std::string& name)
{
    if (name == "rb87-sec5") return rb87_sec5();
    throw InvalidInput("unknown preset '" + name + "'");
}

} // namespace presets

} // namespace rydpair

#endif
