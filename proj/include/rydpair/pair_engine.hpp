#ifndef RYDPAIR_PAIR_ENGINE_HPP
#define RYDPAIR_PAIR_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include <rydpair/common.hpp>
#include <rydpair/detail/oscillatory.hpp>
#include <rydpair/ensemble.hpp>
#include <rydpair/series.hpp>

namespace rydpair {

namespace constants {

/* integral over the whole line of 1 - cos(1/|z|^3) */
inline double line_mean_integral()
{
    return -(2.0 / 3.0) * std::tgamma(-1.0 / 3.0) * std::cos(pi / 6.0);
}

/* integral over all space of 1 - cos(1/r^3) */
inline double volume_mean_integral() { return 2.0 / 3.0 * pi * pi; }

} // namespace constants

/* exp(-i V(r) T) - 1 */
inline Complex pair_amplitude(double r, const Interaction& interaction = {})
{
    return detail::bracket_from_phase(interaction.phase(r));
}

inline double one_minus_cos(double phase)
{
    const double h = std::sin(0.5 * phase);
    return 2.0 * h * h;
}

struct FlaggedValue
{
    Complex value{};
    /* true when the cloud is too small for the requested correlator */
    bool flagged = false;
};

/* A^4 eps^4 / 4, the common prefactor of the atomic correlators. */
inline double pair_prefactor(double epsilon)
{
    const double A = dark_state_norm(epsilon);
    const double e2 = epsilon * epsilon;
    return A * A * A * A * e2 * e2 / 4.0;
}

inline FlaggedValue g1_at(const AtomCloud& cloud, std::size_t j, std::size_t jp, double epsilon,
                          const Interaction& interaction = {})
{
    const std::size_t n = cloud.size();
    if (j >= n || jp >= n) throw InvalidInput("g1_at: atom index out of range");
    if ((j == jp && n < 2) || (j != jp && n < 3)) return {Complex{}, true};
    Complex sum{};
    for (std::size_t k = 0; k < n; ++k) {
        if (k == j || k == jp) continue;
        sum += std::conj(pair_amplitude(cloud.distance(j, k), interaction)) *
               pair_amplitude(cloud.distance(jp, k), interaction);
    }
    return {pair_prefactor(epsilon) * sum, false};
}

inline double g2_at(const AtomCloud& cloud, std::size_t j, std::size_t jp, double epsilon,
                    const Interaction& interaction = {})
{
    if (j >= cloud.size() || jp >= cloud.size()) throw InvalidInput("g2_at: atom index out of range");
    if (j == jp) return 0.0;
    return 2.0 * pair_prefactor(epsilon) * one_minus_cos(interaction.phase(cloud.distance(j, jp)));
}

inline Eigen::MatrixXd g2_at_matrix(const AtomCloud& cloud, double epsilon, const Interaction& interaction = {})
{
    const std::size_t n = cloud.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) out(a, b) = out(b, a) = g2_at(cloud, a, b, epsilon, interaction);
    return out;
}

inline Eigen::MatrixXcd g1_at_matrix(const AtomCloud& cloud, double epsilon, const Interaction& interaction = {})
{
    const std::size_t n = cloud.size();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) out(a, b) = g1_at(cloud, a, b, epsilon, interaction).value;
    return out;
}

struct AveragingBand
{
    double separation = 1.0;
    double half_width = 0.05;

    void validate() const
    {
        if (!(half_width > 0.0) || !(half_width < separation))
            throw InvalidInput("AveragingBand: need 0 < half_width < separation");
    }
};

/**
 * Default band: a twentieth of the separation, widened to two mean
 * spacings when the cloud is sparse, but never beyond half the separation.
 */
inline AveragingBand default_band(double separation, double mean_spacing)
{
    const double hw = std::max(separation / 20.0, 2.0 * mean_spacing);
    return {separation, std::min(hw, 0.5 * separation)};
}

inline double mean_axial_spacing(const AtomCloud& cloud)
{
    if (cloud.size() < 2) return std::numeric_limits<double>::infinity();
    double lo = cloud.positions.front().z(), hi = lo;
    for (const auto& r : cloud.positions) {
        lo = std::min(lo, r.z());
        hi = std::max(hi, r.z());
    }
    return (hi - lo) / static_cast<double>(cloud.size() - 1);
}

inline double transverse_extent(const AtomCloud& cloud)
{
    double width = 0.0;
    if (cloud.dim_mode == DimMode::reduced_1d) return width;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& r : cloud.positions) {
        xlo = std::min(xlo, r.x());
        xhi = std::max(xhi, r.x());
        ylo = std::min(ylo, r.y());
        yhi = std::max(yhi, r.y());
    }
    return std::hypot(xhi - xlo, yhi - ylo);
}

struct G2LightOptions
{
    Normalization normalization = Normalization::input_intensity;
    /* fixed half-width; default_band() per tau when empty */
    std::optional<double> half_width;
    unsigned threads = 1;
};

/**
 * Band-averaged light G2 from an explicit cloud. Lengths of the cloud, of
 * the interaction and v_g0 * tau must share one unit. N_r counts ordered
 * pairs (j, j') whose axial separation lies in the band. With the
 * input-intensity normalization each pair contributes |exp(-iVT) - 1|^2.
 */
inline CorrelationSeries g2_light(const AtomCloud& cloud, double epsilon, const Interaction& interaction,
                                  double v_g0, const std::vector<double>& tau_grid, const G2LightOptions& opt = {})
{
    if (tau_grid.empty()) throw InvalidInput("g2_light: empty tau grid");
    if (!(v_g0 > 0.0)) throw InvalidInput("g2_light: v_g0 must be positive");
    CorrelationSeries out = make_series(GridKind::tau, tau_grid, opt.normalization);
    out.pair_count.assign(tau_grid.size(), 0);

    const double width = transverse_extent(cloud);
    if (!(v_g0 * tau_grid.front() > width))
        throw InvalidInput("g2_light: v_g0 * min(tau) must exceed the transverse cloud width");

    std::vector<std::size_t> order(cloud.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cloud.positions[a].z() < cloud.positions[b].z(); });
    std::vector<double> z(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) z[i] = cloud.positions[order[i]].z();

    const double spacing = mean_axial_spacing(cloud);
    const double weight = opt.normalization == Normalization::raw ? 2.0 * pair_prefactor(epsilon) : 2.0;

    parallel_for(tau_grid.size(), opt.threads, [&](std::size_t t) {
        const double sep = v_g0 * tau_grid[t];
        AveragingBand band = opt.half_width ? AveragingBand{sep, *opt.half_width} : default_band(sep, spacing);
        band.validate();
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            auto first = std::lower_bound(z.begin() + static_cast<std::ptrdiff_t>(i) + 1, z.end(),
                                          z[i] + sep - band.half_width);
            for (auto it = first; it != z.end() && *it <= z[i] + sep + band.half_width; ++it) {
                const std::size_t k = static_cast<std::size_t>(it - z.begin());
                const double r = cloud.distance(order[i], order[k]);
                sum += weight * one_minus_cos(interaction.phase(r));
                ++pairs;
            }
        }
        // each unordered pair stands for (j, j') and (j', j)
        out.pair_count[t] = 2 * pairs;
        if (pairs == 0) {
            out.gap[t] = 1;
            out.values[t] = std::numeric_limits<double>::quiet_NaN();
        } else {
            out.values[t] = sum / static_cast<double>(pairs);
        }
    });
    return out;
}

/**
 * Continuum (homogeneous 1D) limit: every separation z = v_g0 tau is
 * present, so the band average reduces to the exact separation value.
 */
inline CorrelationSeries g2_light_continuum(double epsilon, const Interaction& interaction, double v_g0,
                                            const std::vector<double>& tau_grid,
                                            Normalization normalization = Normalization::input_intensity,
                                            double cloud_width = 0.0)
{
    if (tau_grid.empty()) throw InvalidInput("g2_light_continuum: empty tau grid");
    if (!(v_g0 * tau_grid.front() > cloud_width))
        throw InvalidInput("g2_light_continuum: v_g0 * min(tau) must exceed the transverse cloud width");
    CorrelationSeries out = make_series(GridKind::tau, tau_grid, normalization);
    const double weight = normalization == Normalization::raw ? 2.0 * pair_prefactor(epsilon) : 2.0;
    for (std::size_t t = 0; t < tau_grid.size(); ++t)
        out.values[t] = weight * one_minus_cos(interaction.phase(v_g0 * tau_grid[t]));
    return out;
}

/* Restored-to-input intensity ratio at a retrieval point r. */
inline double intensity_ratio_at(const AtomCloud& cloud, const Eigen::Vector3d& point, double epsilon,
                                 const Interaction& interaction = {})
{
    const double A = dark_state_norm(epsilon);
    double sum = 0.0;
    for (const auto& r : cloud.positions) {
        const double d = (r - point).norm();
        if (d > 0.0) sum += one_minus_cos(interaction.phase(d));
    }
    return A * A * A * A * epsilon * epsilon / 2.0 * sum;
}

/* Mean over retrieval points placed on the atoms themselves (self term excluded). */
inline double intensity_ratio(const AtomCloud& cloud, double epsilon, const Interaction& interaction = {})
{
    if (cloud.size() == 0) throw InvalidInput("intensity_ratio: empty cloud");
    double total = 0.0;
    for (const auto& r : cloud.positions) total += intensity_ratio_at(cloud, r, epsilon, interaction);
    return total / static_cast<double>(cloud.size());
}

/**
 * Homogeneous-medium value. `density` is per volume (3D) or per length
 * (1D) in the unit system of `interaction`.
 */
inline double intensity_ratio_continuum(double density, double epsilon, DimMode mode,
                                        const Interaction& interaction = {})
{
    const double A = dark_state_norm(epsilon);
    const double rc = interaction.characteristic_radius();
    const double integral = mode == DimMode::full_3d ? constants::volume_mean_integral() * rc * rc * rc
                                                     : constants::line_mean_integral() * rc;
    return A * A * A * A * epsilon * epsilon / 2.0 * density * integral;
}

/**
 * Overlap integral of conj(b(x)) b(x + d) along the line, protocol units.
 * It is real and even in d, so only x >= -d/2 is integrated. Within
 * |x| < a the oscillating part of conj(b) is integrated by parts.
 */
inline constexpr double g1_line_min_separation = 0.05;

inline double g1_line_profile(double d, const detail::QuadratureOptions& opt = {1e-12, 1, 1.0})
{
    d = std::abs(d);
    if (d == 0.0) return 2.0 * constants::line_mean_integral();
    // the panel count grows like d^-3 below this
    if (d < g1_line_min_separation)
        throw InvalidInput("g1_line_profile: nonzero separations below 0.05 r_c are not resolved");
    const double a = std::min(0.15, 0.25 * d);
    const double upper = d + 30.0;
    auto f = [d](double x) { return detail::bracket(x + d); };
    auto df = [d](double x) {
        const double y = x + d;
        return Complex(0.0, 3.0 / (y * y * y * y)) * std::exp(Complex(0.0, -1.0 / (y * y * y)));
    };
    auto product = [&](double x) { return std::conj(detail::bracket(x)) * f(x); };
    auto both = [d](double x) { return detail::bracket_frequency(x) + detail::bracket_frequency(x + d); };
    auto near = [d](double x) { return detail::bracket_frequency(x + d); };

    const detail::QuadratureOptions& panel = opt;
    Complex sum{};
    if (-0.5 * d < -a)
        sum += detail::integrate_panels(product, detail::oscillation_breaks(-0.5 * d, -a, both, panel.max_width), panel).value;
    // core: conj(e) f - f over [-a, a], folded onto [0, a]
    sum -= detail::integrate_panels(f, detail::oscillation_breaks(-a, a, near, panel.max_width), panel).value;
    const Complex g = std::conj(f(a) + f(-a));
    const Complex dg = std::conj(df(a) - df(-a));
    sum += std::conj(detail::bracket_core_endpoint(a, g, dg));
    sum += detail::integrate_panels(product, detail::oscillation_breaks(a, upper, both, panel.max_width), panel).value;
    return 2.0 * sum.real();
}

struct G1LightOptions
{
    Normalization normalization = Normalization::raw;
    unsigned threads = 1;
};

/**
 * Continuum G1 for a homogeneous line of atoms with linear density
 * `line_density` (per unit length of `interaction`). The raw value carries
 * the prefactor A^4 eps^4 / 4 and the density; the normalized value is the
 * bare overlap integral.
 */
inline CorrelationSeries g1_light_continuum(double line_density, double epsilon, const Interaction& interaction,
                                            double v_g0, const std::vector<double>& tau_grid,
                                            const G1LightOptions& opt = {})
{
    CorrelationSeries out = make_series(GridKind::tau, tau_grid, opt.normalization);
    const double rc = interaction.characteristic_radius();
    const double scale = opt.normalization == Normalization::raw ? pair_prefactor(epsilon) * line_density * rc : 1.0;
    parallel_for(tau_grid.size(), opt.threads, [&](std::size_t i) {
        out.values[i] = scale * g1_line_profile(v_g0 * tau_grid[i] / rc);
    });
    return out;
}

/**
 * G1 from an explicit cloud, averaged over retrieval points `probes`:
 * sum_j conj(b(|r - r_j|)) b(|r + v tau e_z - r_j|).
 */
inline CorrelationSeries g1_light(const AtomCloud& cloud, const std::vector<Eigen::Vector3d>& probes, double epsilon,
                                  const Interaction& interaction, double v_g0, const std::vector<double>& tau_grid,
                                  const G1LightOptions& opt = {})
{
    if (probes.empty()) throw InvalidInput("g1_light: no retrieval points");
    CorrelationSeries out = make_series(GridKind::tau, tau_grid, opt.normalization);
    const double scale = opt.normalization == Normalization::raw ? pair_prefactor(epsilon) : 1.0;
    auto amp = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
        const double d = (a - b).norm();
        return d > 0.0 ? pair_amplitude(d, interaction) : Complex{};
    };
    parallel_for(tau_grid.size(), opt.threads, [&](std::size_t t) {
        const Eigen::Vector3d shift(0.0, 0.0, v_g0 * tau_grid[t]);
        Complex total{};
        for (const auto& r : probes) {
            Complex sum{};
            for (const auto& rj : cloud.positions) sum += std::conj(amp(r, rj)) * amp(r + shift, rj);
            total += sum;
        }
        out.values[t] = scale * total / static_cast<double>(probes.size());
    });
    return out;
}

/* Builds the series on [-tau_max, tau_max] from tau >= 0 using G1(-tau) = conj G1(tau). */
inline CorrelationSeries hermitian_extend(const CorrelationSeries& half)
{
    half.validate();
    if (half.grid.empty() || half.grid.front() != 0.0)
        throw InvalidInput("hermitian_extend: grid must start at zero");
    const std::size_t n = half.size();
    std::vector<double> grid(2 * n - 1);
    std::vector<Complex> values(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        grid[n - 1 + i] = half.grid[i];
        grid[n - 1 - i] = -half.grid[i];
        values[n - 1 + i] = half.values[i];
        values[n - 1 - i] = std::conj(half.values[i]);
    }
    CorrelationSeries out = make_series(half.grid_kind, std::move(grid), half.normalization);
    out.values = std::move(values);
    out.units = half.units;
    return out;
}

struct SpectrumOptions
{
    /* relative edge magnitude above which the input is tapered */
    double edge_tolerance = 1e-6;
    /* fraction of each side covered by the cosine taper */
    double taper_fraction = 0.1;
    unsigned threads = 1;
};

/**
 * S(omega) = integral exp(-i omega tau) G1(tau) d tau by the trapezoid rule
 * on a uniform tau grid.
 */
inline CorrelationSeries spectrum(const CorrelationSeries& g1, const std::vector<double>& omega_grid,
                                  const SpectrumOptions& opt = {})
{
    g1.validate();
    const std::size_t n = g1.size();
    if (n < 3) throw InvalidInput("spectrum: need at least three samples");
    const double h = (g1.grid.back() - g1.grid.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(g1.grid[i] - g1.grid[i - 1] - h) > 1e-6 * h) throw InvalidInput("spectrum: grid must be uniform");

    double peak = 0.0;
    for (const auto& v : g1.values) peak = std::max(peak, std::abs(v));
    const double edge = std::max(std::abs(g1.values.front()), std::abs(g1.values.back()));

    std::vector<Complex> weighted(g1.values);
    bool windowed = false;
    if (peak > 0.0 && edge > opt.edge_tolerance * peak) {
        windowed = true;
        const double lo = g1.grid.front(), hi = g1.grid.back();
        const double ramp = opt.taper_fraction * (hi - lo);
        for (std::size_t i = 0; i < n; ++i) {
            const double dist = std::min(g1.grid[i] - lo, hi - g1.grid[i]);
            if (dist < ramp) weighted[i] *= 0.5 * (1.0 - std::cos(pi * dist / ramp));
        }
    }
    weighted.front() *= 0.5;
    weighted.back() *= 0.5;

    GridKind kind = g1.grid_kind == GridKind::z ? GridKind::k : GridKind::omega;
    CorrelationSeries out = make_series(kind, omega_grid, g1.normalization);
    out.windowed = windowed;
    parallel_for(omega_grid.size(), opt.threads, [&](std::size_t k) {
        Complex sum{};
        for (std::size_t i = 0; i < n; ++i) sum += weighted[i] * std::exp(Complex(0.0, -omega_grid[k] * g1.grid[i]));
        out.values[k] = h * sum;
    });
    return out;
}

/* Full width at half maximum about the global peak; NaN when a side never drops below half. */
inline double fwhm(const std::vector<double>& grid, const std::vector<double>& values)
{
    if (grid.size() != values.size() || grid.size() < 3) throw InvalidInput("fwhm: bad input");
    const auto peak_it = std::max_element(values.begin(), values.end());
    const std::size_t p = static_cast<std::size_t>(peak_it - values.begin());
    const double half = 0.5 * *peak_it;
    auto crossing = [&](std::size_t i, std::size_t j) {
        return grid[i] + (half - values[i]) * (grid[j] - grid[i]) / (values[j] - values[i]);
    };
    double left = std::numeric_limits<double>::quiet_NaN(), right = left;
    for (std::size_t i = p; i > 0; --i)
        if (values[i - 1] < half) {
            left = crossing(i - 1, i);
            break;
        }
    for (std::size_t i = p; i + 1 < values.size(); ++i)
        if (values[i + 1] < half) {
            right = crossing(i, i + 1);
            break;
        }
    return right - left;
}

inline double fwhm(const CorrelationSeries& s)
{
    std::vector<double> mag(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) mag[i] = s.values[i].real();
    return fwhm(s.grid, mag);
}

} // namespace rydpair

#endif
