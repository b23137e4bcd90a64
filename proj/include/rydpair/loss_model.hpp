#ifndef RYDPAIR_LOSS_MODEL_HPP
#define RYDPAIR_LOSS_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include <rydpair/common.hpp>
#include <rydpair/detail/oscillatory.hpp>
#include <rydpair/ensemble.hpp>
#include <rydpair/series.hpp>

/*
 * Pair amplitude along the propagation axis, I(z) = i (exp(-i V(z) T) - 1),
 * and its Gaussian-smoothed counterpart I'(z) under nonadiabatic polariton
 * loss. Kernels work in protocol units (r_c = 1); public functions accept
 * any length unit consistent with `interaction`.
 */

namespace rydpair {

struct LossOptions
{
    /* starting width of the averaged core around z = 0 */
    double core_start = 0.15;
    double core_shrink = 0.7;
    unsigned max_shrinks = 6;
    /* stop shrinking once successive results differ by less than this */
    double core_tol = 1e-9;
    /* kernel support in units of the loss length */
    double support = 12.0;
    detail::QuadratureOptions quadrature{};
    unsigned threads = 1;
};

struct LossPoint
{
    Complex value{};
    double error = 0.0;
    bool converged = true;
};

namespace detail {

/* kernel exp(-u^2 / 4l^2) / (2 l sqrt(pi)) */
inline double loss_kernel(double u, double ell)
{
    return std::exp(-u * u / (4.0 * ell * ell)) / (2.0 * ell * std::sqrt(pi));
}

inline double loss_kernel_derivative(double u, double ell) { return -u / (2.0 * ell * ell) * loss_kernel(u, ell); }

inline LossPoint lossy_point(double x, double ell, const LossOptions& opt)
{
    const double lower = std::max(0.0, x - opt.support * ell);
    const double upper = x + opt.support * ell;
    auto w = [&](double t) { return loss_kernel(t - x, ell) + loss_kernel(t + x, ell); };
    auto dw = [&](double t) { return loss_kernel_derivative(t - x, ell) + loss_kernel_derivative(t + x, ell); };

    auto eval = [&](double a) { return bracket_integral(w, dw, a, lower, upper, opt.quadrature); };

    LossPoint out;
    double a = opt.core_start;
    QuadratureResult prev = eval(a);
    if (lower >= a) {
        out.value = imag_unit * prev.value;
        out.error = prev.error;
        return out;
    }
    out.converged = false;
    for (unsigned i = 0; i < opt.max_shrinks; ++i) {
        a *= opt.core_shrink;
        QuadratureResult next = eval(a);
        const double change = std::abs(next.value - prev.value);
        prev = next;
        if (change <= opt.core_tol * std::max(1.0, std::abs(next.value))) {
            out.converged = true;
            break;
        }
    }
    out.value = imag_unit * prev.value;
    out.error = prev.error;
    return out;
}

/*
 * B(k) = integral over the line of b(|t|) exp(ikt), protocol units. The
 * slowly decaying tail -i/t^3 is removed by subtracting -i (1 + t^2)^(-3/2),
 * whose cosine transform is k K_1(k).
 */
inline QuadratureResult line_transform(double k, const QuadratureOptions& opt = {}, double cutoff = 40.0)
{
    k = std::abs(k);
    const double a = k > 0.0 ? std::min(0.1, 0.5 * std::pow(3.0 / k, 0.25)) : 0.1;
    auto g = [k](double t) { return std::cos(k * t); };
    auto dg = [k](double t) { return -k * std::sin(k * t); };
    auto tail = [](double t) { return std::pow(1.0 + t * t, -1.5); };

    QuadratureResult out;
    out.value = (k > 0.0 ? -std::sin(k * a) / k : -a) + bracket_core_endpoint(a, g(a), dg(a));

    const double width = std::min(opt.max_width, k > 0.0 ? 0.5 * pi / k : opt.max_width);
    auto freq = [k](double t) { return bracket_frequency(t) + k; };
    const auto rest = integrate_panels(
        [&](double t) { return (bracket(t) + imag_unit * tail(t)) * g(t); }, oscillation_breaks(a, cutoff, freq, width), opt);
    out.value += rest.value;
    out.error += rest.error;

    const auto head = integrate_panels([&](double t) { return Complex(g(t) * tail(t)); },
                                       oscillation_breaks(0.0, a, [k](double) { return k; }, width), opt);
    const double full = k > 0.0 ? k * std::cyl_bessel_k(1.0, k) : 1.0;
    out.value -= imag_unit * (full - head.value.real());
    out.error += head.error;

    out.value *= 2.0;
    out.error *= 2.0;
    return out;
}

} // namespace detail

inline Complex lossless_value(double z, const Interaction& interaction = {})
{
    return imag_unit * detail::bracket_from_phase(interaction.phase(std::abs(z)));
}

inline CorrelationSeries lossless_profile(const std::vector<double>& z_grid, const Interaction& interaction = {})
{
    CorrelationSeries out = make_series(GridKind::z, z_grid, Normalization::input_intensity);
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
        if (!(z_grid[i] > 0.0)) throw InvalidInput("lossless_profile: grid must be positive");
        out.values[i] = lossless_value(z_grid[i], interaction);
    }
    return out;
}

/* I'(z) by direct convolution in real space. */
inline LossPoint lossy_value(double z, double loss_length, const Interaction& interaction = {},
                             const LossOptions& opt = {})
{
    if (!(loss_length > 0.0)) throw InvalidInput("lossy_value: loss length must be positive");
    const double rc = interaction.characteristic_radius();
    return detail::lossy_point(std::abs(z) / rc, loss_length / rc, opt);
}

struct LossProfile
{
    double loss_length = 0.0;
    std::vector<double> grid;
    std::vector<Complex> lossless_I;
    std::vector<Complex> lossy_I;
    /* the kernel support around every grid point was fully integrated */
    bool coverage_ok = true;
    /* every point met the core-shrink tolerance */
    bool converged = true;
    double max_error = 0.0;
};

inline LossProfile lossy_profile(const std::vector<double>& z_grid, double loss_length,
                                 const Interaction& interaction = {}, const LossOptions& opt = {})
{
    if (!(loss_length > 0.0)) throw InvalidInput("lossy_profile: loss length must be positive");
    LossProfile out;
    out.loss_length = loss_length;
    out.grid = z_grid;
    out.lossless_I.resize(z_grid.size());
    out.lossy_I.resize(z_grid.size());
    std::vector<LossPoint> points(z_grid.size());
    for (double z : z_grid)
        if (!(z > 0.0)) throw InvalidInput("lossy_profile: grid must be positive");
    parallel_for(z_grid.size(), opt.threads, [&](std::size_t i) {
        points[i] = lossy_value(z_grid[i], loss_length, interaction, opt);
    });
    out.coverage_ok = opt.support >= 6.0;
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
        out.lossless_I[i] = lossless_value(z_grid[i], interaction);
        out.lossy_I[i] = points[i].value;
        out.converged = out.converged && points[i].converged;
        out.max_error = std::max(out.max_error, points[i].error);
    }
    return out;
}

inline LossProfile lossy_profile(const std::vector<double>& z_grid, const PhysicalParams& p,
                                 const LossOptions& opt = {})
{
    validate(p);
    return lossy_profile(z_grid, p.length_L / std::sqrt(p.alpha), Interaction{p.c3, p.storage_T}, opt);
}

/* I~(k) = i * integral of b(|z|) exp(ikz) dz, in the length unit of `interaction`. */
inline CorrelationSeries i_tilde(const std::vector<double>& k_grid, const Interaction& interaction = {},
                                 const detail::QuadratureOptions& quad = {}, unsigned threads = 1)
{
    CorrelationSeries out = make_series(GridKind::k, k_grid, Normalization::raw);
    const double rc = interaction.characteristic_radius();
    std::vector<double> errors(k_grid.size());
    parallel_for(k_grid.size(), threads, [&](std::size_t i) {
        const auto r = detail::line_transform(k_grid[i] * rc, quad);
        out.values[i] = imag_unit * rc * r.value;
        errors[i] = rc * r.error;
    });
    for (std::size_t i = 0; i < k_grid.size(); ++i)
        if (!std::isfinite(out.values[i].real()) || errors[i] > 1e-6 * std::max(1.0, std::abs(out.values[i])))
            out.gap[i] = 1;
    return out;
}

struct FourierOptions
{
    /* the k integral stops where exp(-l^2 k^2) drops below exp(-kmax_factor^2) */
    double kmax_factor = 6.1;
    double panel_width = 0.5;
    /* the remainder past the tail subtraction is cut here; it only affects z near the cut */
    double min_cutoff = 40.0;
    detail::QuadratureOptions quadrature{};
    unsigned threads = 1;
};

/*
 * I'(z) = (1/pi) integral_0^inf I~(k) cos(kz) exp(-l^2 k^2) dk, with I~
 * sampled on composite 20-point Gauss-Legendre panels graded towards k = 0.
 */
inline std::vector<Complex> lossy_profile_fourier(const std::vector<double>& z_grid, double loss_length,
                                                  const Interaction& interaction = {}, const FourierOptions& opt = {})
{
    using Rule = boost::math::quadrature::gauss<double, 20>;
    if (!(loss_length > 0.0)) throw InvalidInput("lossy_profile_fourier: loss length must be positive");
    const double rc = interaction.characteristic_radius();
    const double ell = loss_length / rc;
    const double kmax = opt.kmax_factor / ell;
    double zmax = 0.0;
    for (double z : z_grid) zmax = std::max(zmax, std::abs(z) / rc);
    const double cutoff = std::max(opt.min_cutoff, zmax + 20.0 * ell + 10.0);

    std::vector<double> edges{0.0};
    for (double e : {1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0})
        if (e < kmax) edges.push_back(e);
    while (edges.back() + opt.panel_width < kmax) edges.push_back(edges.back() + opt.panel_width);
    edges.push_back(kmax);

    // full symmetric rule from boost's half-abscissae
    std::vector<double> xs, ws;
    const auto& ab = Rule::abscissa();
    const auto& wt = Rule::weights();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        if (ab[i] == 0.0) {
            xs.push_back(0.0);
            ws.push_back(wt[i]);
            continue;
        }
        xs.push_back(ab[i]);
        ws.push_back(wt[i]);
        xs.push_back(-ab[i]);
        ws.push_back(wt[i]);
    }

    std::vector<double> nodes, weights;
    for (std::size_t p = 1; p < edges.size(); ++p) {
        const double mid = 0.5 * (edges[p] + edges[p - 1]);
        const double half = 0.5 * (edges[p] - edges[p - 1]);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            nodes.push_back(mid + half * xs[i]);
            weights.push_back(half * ws[i]);
        }
    }
    std::vector<Complex> filtered(nodes.size());
    parallel_for(nodes.size(), opt.threads, [&](std::size_t i) {
        const double k = nodes[i];
        filtered[i] = imag_unit * detail::line_transform(k, opt.quadrature, cutoff).value * std::exp(-ell * ell * k * k) *
                      weights[i];
    });

    std::vector<Complex> out(z_grid.size());
    for (std::size_t j = 0; j < z_grid.size(); ++j) {
        const double x = z_grid[j] / rc;
        Complex sum{};
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += filtered[i] * std::cos(nodes[i] * x);
        out[j] = sum / pi;
    }
    return out;
}

inline CorrelationSeries lossy_g2(const LossProfile& profile)
{
    CorrelationSeries out = make_series(GridKind::z, profile.grid, Normalization::input_intensity);
    for (std::size_t i = 0; i < profile.grid.size(); ++i) out.values[i] = std::norm(profile.lossy_I[i]);
    return out;
}

inline CorrelationSeries lossless_g2(const LossProfile& profile)
{
    CorrelationSeries out = make_series(GridKind::z, profile.grid, Normalization::input_intensity);
    for (std::size_t i = 0; i < profile.grid.size(); ++i) out.values[i] = std::norm(profile.lossless_I[i]);
    return out;
}

struct PolaritonAttenuation
{
    /* amplitude factor exp(-L^2 k^2 / 2 alpha) */
    double factor = 1.0;
    /* gamma_pol = 2 Gamma (v_g0 k)^2 / Omega_c^2 */
    double decay_rate = 0.0;
    /* half the transit time, L / 2 v_g0 */
    double tau_prop = 0.0;
};

inline PolaritonAttenuation polariton_attenuation(double k, const PhysicalParams& p)
{
    validate(p);
    const double v = p.omega_c * p.omega_c * p.length_L / (p.gamma_e * p.alpha);
    PolaritonAttenuation out;
    out.factor = std::exp(-p.length_L * p.length_L * k * k / (2.0 * p.alpha));
    out.decay_rate = 2.0 * p.gamma_e * v * v * k * k / (p.omega_c * p.omega_c);
    out.tau_prop = p.length_L / (2.0 * v);
    return out;
}

struct Extremum
{
    double position = 0.0;
    double value = 0.0;
};

/* Brent refinement of a maximum of f bracketed by [lo, hi]. */
template<class F>
Extremum refine_maximum(F&& f, double lo, double hi)
{
    const auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, lo, hi, 50);
    return {r.first, -r.second};
}

/* Outermost maximum of |I(z)|^2, sitting where V(z) T = pi. */
inline Extremum outermost_lossless_maximum(const Interaction& interaction = {})
{
    const double rc = interaction.characteristic_radius();
    const double guess = rc * std::cbrt(1.0 / pi);
    return refine_maximum([&](double z) { return std::norm(lossless_value(z, interaction)); }, 0.8 * guess,
                          1.25 * guess);
}

} // namespace rydpair

#endif
