#ifndef RYDPAIR_DETAIL_OSCILLATORY_HPP
#define RYDPAIR_DETAIL_OSCILLATORY_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <rydpair/common.hpp>

/*
 * Quadrature helpers for integrands built from the pair bracket
 * b(t) = exp(-i / t^3) - 1 (protocol units), whose local frequency 3/t^4
 * diverges at the origin.
 */

namespace rydpair::detail {

/* exp(-i phase) - 1 without cancellation for small phases */
inline Complex bracket_from_phase(double phase)
{
    const double h = std::sin(0.5 * phase);
    return {-2.0 * h * h, -std::sin(phase)};
}

inline Complex bracket(double t)
{
    const double at = std::abs(t);
    return bracket_from_phase(1.0 / (at * at * at));
}

inline double bracket_frequency(double t)
{
    const double t2 = t * t;
    return 3.0 / (t2 * t2);
}

struct QuadratureOptions
{
    double panel_tol = 1e-12;
    unsigned max_depth = 1;
    double max_width = 0.25;
};

struct QuadratureResult
{
    Complex value{};
    double error = 0.0;
};

/**
 * Breakpoints in [lo, hi] such that each panel spans at most about half a
 * period of the local angular frequency `freq(t)` and at most `max_width`.
 */
template<class Freq>
std::vector<double> oscillation_breaks(double lo, double hi, Freq freq, double max_width)
{
    std::vector<double> breaks{lo};
    double t = lo;
    while (t < hi) {
        double step = std::min(max_width, pi / std::max(freq(t), 1e-300));
        // frequency may grow inside the panel
        while (step > 1e-14 && freq(std::min(t + step, hi)) * step > 1.5 * pi) step *= 0.5;
        step = std::max(step, 1e-14 * std::max(1.0, std::abs(t)));
        t = std::min(t + step, hi);
        breaks.push_back(t);
    }
    return breaks;
}

template<class F>
QuadratureResult integrate_panels(F&& f, const std::vector<double>& breaks, const QuadratureOptions& opt = {})
{
    using boost::math::quadrature::gauss_kronrod;
    QuadratureResult out;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        double err = 0.0;
        out.value += gauss_kronrod<double, 15>::integrate(f, breaks[i - 1], breaks[i], opt.max_depth,
                                                           opt.panel_tol, &err);
        out.error += err;
    }
    return out;
}

/**
 * Integral over [0, a] of exp(-i/t^3) g(t) for g smooth on [0, a], by two
 * rounds of integration by parts. The neglected term is O(a^11 g'').
 */
inline Complex bracket_core_endpoint(double a, Complex g, Complex dg)
{
    const double a4 = a * a * a * a;
    const double a7 = a4 * a * a * a;
    const Complex h0 = g * a4 / Complex(0.0, 3.0);
    const Complex h1 = -(dg * a7 * a + 4.0 * g * a7) / 9.0;
    return std::exp(Complex(0.0, -1.0 / (a * a * a))) * (h0 - h1);
}

/**
 * Integral over [0, upper] of b(t) g(t). Inside [0, a] the oscillating part
 * is handled by bracket_core_endpoint; beyond it by panels. `lower` lets the
 * caller skip a region where g vanishes.
 */
template<class G, class DG>
QuadratureResult bracket_integral(G&& g, DG&& dg, double a, double lower, double upper,
                                  const QuadratureOptions& opt = {})
{
    using boost::math::quadrature::gauss_kronrod;
    QuadratureResult out;
    if (!(upper > lower)) return out;
    double start = lower;
    if (lower < a) {
        const double top = std::min(a, upper);
        double err = 0.0;
        const Complex smooth = gauss_kronrod<double, 15>::integrate(g, lower, top, opt.max_depth, opt.panel_tol, &err);
        out.value -= smooth;
        out.error += err;
        out.value += bracket_core_endpoint(top, g(top), dg(top));
        if (lower > 0.0) out.value -= bracket_core_endpoint(lower, g(lower), dg(lower));
        start = top;
    }
    if (upper > start) {
        const auto breaks = oscillation_breaks(start, upper, bracket_frequency, opt.max_width);
        const auto rest = integrate_panels([&](double t) { return bracket(t) * g(t); }, breaks, opt);
        out.value += rest.value;
        out.error += rest.error;
    }
    return out;
}

} // namespace rydpair::detail

#endif
