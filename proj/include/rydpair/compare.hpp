#ifndef RYDPAIR_COMPARE_HPP
#define RYDPAIR_COMPARE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include <rydpair/exact_oracle.hpp>
#include <rydpair/pair_engine.hpp>

namespace rydpair {

struct OracleComparison
{
    Eigen::MatrixXd exact;
    Eigen::MatrixXd pair;
    /* |exact - pair| / pair, off-diagonal */
    Eigen::MatrixXd relative;
    double max_relative = 0.0;
    double median_relative = 0.0;
    /* every entry satisfies |exact - pair| <= rel_tol * pair + abs_floor */
    bool within = true;
};

inline OracleComparison compare_g2(const RddiPropagator& propagator, const AtomCloud& cloud, double epsilon,
                                   const Interaction& interaction = {}, double rel_tol = 0.05,
                                   double abs_floor = 1e-10)
{
    const std::size_t n = cloud.size();
    ManyBodyState plus = apply_half_pi(build_dark_state(epsilon, n), PulseSpec::make(PulseKind::first_half_pi));
    const ManyBodyState fin = apply_half_pi(propagator.apply(plus), PulseSpec::make(PulseKind::second_half_pi));

    OracleComparison out;
    out.exact = measure_correlators(fin).g2;
    out.pair = g2_at_matrix(cloud, epsilon, interaction);
    out.relative = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> devs;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const double diff = std::abs(out.exact(a, b) - out.pair(a, b));
            const double p = out.pair(a, b);
            const double inf = std::numeric_limits<double>::infinity();
            out.relative(a, b) = p > 0.0 ? diff / p : (diff > 0.0 ? inf : 0.0);
            if (diff > rel_tol * p + abs_floor) out.within = false;
            if (a < b) devs.push_back(out.relative(a, b));
        }
    if (!devs.empty()) {
        out.max_relative = *std::max_element(devs.begin(), devs.end());
        std::nth_element(devs.begin(), devs.begin() + static_cast<std::ptrdiff_t>(devs.size() / 2), devs.end());
        out.median_relative = devs[devs.size() / 2];
    }
    return out;
}

inline OracleComparison compare_g2(const AtomCloud& cloud, double epsilon, const Interaction& interaction = {},
                                   double rel_tol = 0.05, double abs_floor = 1e-10)
{
    return compare_g2(RddiPropagator(cloud, interaction), cloud, epsilon, interaction, rel_tol, abs_floor);
}

/**
 * Uniform 1D cloud whose Rydberg line density times r_c equals `packing`
 * at probe ratio `epsilon` (protocol units).
 */
inline AtomCloud packed_line_cloud(std::size_t atoms, double epsilon, double packing, std::uint64_t seed)
{
    if (!(packing > 0.0) || !(epsilon > 0.0)) throw InvalidInput("packed_line_cloud: packing and epsilon must be positive");
    const double A = dark_state_norm(epsilon);
    const double length = static_cast<double>(atoms) * A * A * epsilon * epsilon / packing;
    return sample_cloud(Segment{length, 1.0}, atoms, seed);
}

} // namespace rydpair

#endif
