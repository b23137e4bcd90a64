#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <rydpair/exact_oracle.hpp>
#include <rydpair/validity.hpp>

using namespace rydpair;

namespace {

// Ci(x) = gamma + ln x + sum_k (-1)^k x^2k / (2k (2k)!)
double cosine_integral(double x)
{
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 40; ++k) {
        term *= -x * x / ((2.0 * k - 1.0) * (2.0 * k));
        sum += term / (2.0 * k);
    }
    return std::numbers::egamma + std::log(x) + sum;
}

double truncated_norm_defect(const AtomCloud& cloud, double eps)
{
    const ManyBodyState plus =
        apply_half_pi(build_dark_state(eps, cloud.size()), PulseSpec::make(PulseKind::first_half_pi));
    return std::abs(pair_expanded_state(plus, cloud).norm() - 1.0);
}

PhysicalParams scaled_units(PhysicalParams p, double length, double time)
{
    p.omega_p0 /= time;
    p.omega_c /= time;
    p.gamma_e /= time;
    p.omega_rf /= time;
    p.storage_T *= time;
    p.c3 *= length * length * length / time;
    p.length_L *= length;
    p.density_n /= length * length * length;
    const auto& s = std::get<Segment>(p.geometry);
    p.geometry = Segment{s.length * length, s.cross_section * length * length};
    return p;
}

} // namespace

TEST(VolumeIntegral, RatioIsUnityAcrossScales)
{
    for (double c3t = 1e-3; c3t <= 1.001e3; c3t *= 10.0) {
        const VolumeIntegral v = volume_integral_check(1.0, c3t);
        EXPECT_NEAR(v.ratio, 1.0, 1e-3) << "C3T = " << c3t;
        EXPECT_TRUE(v.converged);
    }
}

TEST(VolumeIntegral, ZeroStorageTimeGivesZero)
{
    const VolumeIntegral v = volume_integral_check(0.0, 3.0);
    EXPECT_EQ(v.integral, 0.0);
    EXPECT_TRUE(std::isnan(v.ratio));
    EXPECT_THROW(volume_integral_check(-1.0, 1.0), InvalidInput);
}

TEST(VolumeIntegral, ScaleInvariantInRcUnits)
{
    for (auto [T, c3] : std::vector<std::pair<double, double>>{{1e-5, 6.1e-7}, {2.0, 0.3}, {0.01, 400.0}}) {
        const double rc3 = T * c3;
        EXPECT_NEAR(volume_integral_check(T, c3).integral / rc3, 2.0 / 3.0 * pi * pi, 1e-9);
    }
}

TEST(SinVolumeIntegral, MatchesCosineIntegralForm)
{
    for (double cutoff : {2.0, 5.0, 50.0}) {
        const SinVolumeIntegral s = sin_volume_integral(1.0, 1.0, cutoff);
        const double x = 1.0 / (cutoff * cutoff * cutoff);
        const double expect = 4.0 * pi / 3.0 * (std::sin(x) / x - cosine_integral(x));
        EXPECT_NEAR(s.in_rc3, expect, 1e-6 * std::abs(expect)) << "cutoff " << cutoff;
        EXPECT_EQ(s.cutoff, cutoff);
    }
    // grows with the cutoff, as the integrand decays only like 1/r
    EXPECT_GT(sin_volume_integral(1.0, 1.0, 50.0).in_rc3, sin_volume_integral(1.0, 1.0, 5.0).in_rc3);
    const SinVolumeIntegral si = sin_volume_integral(2.0, 4.0, 10.0);
    EXPECT_NEAR(si.value, si.in_rc3 * 8.0, 1e-12);
}

TEST(NormDefect, OrderEstimates)
{
    const NormDefect zero = norm_defect_estimate(0.0, 10.0);
    EXPECT_EQ(zero.first, 0.0);
    EXPECT_EQ(zero.second, 0.0);
    const NormDefect d = norm_defect_estimate(0.05, 10.0);
    EXPECT_NEAR(d.first, 0.025, 1e-15);
    EXPECT_NEAR(d.second, 0.25, 1e-14);
    EXPECT_TRUE(d.first_ok);
    EXPECT_FALSE(d.second_ok);
    EXPECT_THROW(norm_defect_estimate(PhysicalParams{}, 0.0), InvalidInput);
}

// n_ry is proportional to eps^2, so (n r_c^3)^2 (n V) gives eps^6 at fixed positions.
TEST(NormDefect, OracleDefectScalesAsEpsilonToTheSixth)
{
    const AtomCloud cloud = sample_cloud(Segment{6.0, 1.0}, 6, 2);
    for (double eps : {0.1, 0.05}) {
        const double ratio = truncated_norm_defect(cloud, eps) / truncated_norm_defect(cloud, eps / 2.0);
        EXPECT_NEAR(std::log2(ratio), 6.0, 0.1) << "eps " << eps;
    }
}

// Fixed atom number and probe ratio, diluted line: (n_ry r_c)^2 at fixed n_ry V.
TEST(NormDefect, OracleDefectScalesAsSquaredPacking)
{
    auto mean_defect = [](double length) {
        double sum = 0.0;
        const int clouds = 300;
        for (int c = 0; c < clouds; ++c) sum += truncated_norm_defect(sample_cloud(Segment{length, 1.0}, 6, 700 + c), 0.1);
        return sum / clouds;
    };
    const double d16 = mean_defect(16.0), d32 = mean_defect(32.0), d64 = mean_defect(64.0);
    const double slope = std::log2(d16 / d64) / 2.0;
    EXPECT_NEAR(slope, 2.0, 0.4) << d16 << " " << d32 << " " << d64;
    EXPECT_GT(d16, d32);
    EXPECT_GT(d32, d64);
}

TEST(Regime, PresetPassesHardConditions)
{
    const PhysicalParams p = presets::rb87_sec5();
    const RegimeReport r = regime_check(p, {1.3e-6});
    EXPECT_TRUE(r.tau_loss_ok.at(0));
    EXPECT_TRUE(r.tau_loss_all_ok);
    EXPECT_FALSE(r.hard_failure());
    EXPECT_NEAR(r.n_ry_rc3, 0.048, 0.001);
    EXPECT_LT(r.rc_over_rry, 1.0);
    EXPECT_LT(r.t_over_tmax, 1.0);
}

TEST(Regime, ShortDelayFailsLossConditionOnlyAdvisorily)
{
    const RegimeReport r = regime_check(presets::rb87_sec5(), {0.5e-6, 2e-6});
    EXPECT_FALSE(r.tau_loss_ok[0]);
    EXPECT_TRUE(r.tau_loss_ok[1]);
    EXPECT_FALSE(r.tau_loss_all_ok);
}

TEST(Regime, StorageAtTmaxGivesUnitRatio)
{
    PhysicalParams p = presets::rb87_sec5();
    p.storage_T = derive_params(p).t_max;
    const RegimeReport r = regime_check(p);
    EXPECT_DOUBLE_EQ(r.t_over_tmax, 1.0);
    EXPECT_TRUE(r.t_over_tmax_ok);
}

TEST(Regime, MicrowaveMarginAtBlockadeScale)
{
    const PhysicalParams p = presets::rb87_sec5();
    const double r13 = 13e-6;
    const RegimeReport r = regime_check(p, {r13 / derive_params(p).v_g0});
    EXPECT_NEAR(r.rf_distance, r13, 1e-18);
    EXPECT_NEAR(r.rf_margin, p.omega_rf * r13 * r13 * r13 / p.c3, 1e-9);
    EXPECT_GT(r.rf_margin, 1.0);
    EXPECT_TRUE(r.rf_margin_ok);
}

TEST(Regime, VerdictsFollowThresholds)
{
    const PhysicalParams p = presets::rb87_sec5();
    const RegimeReport base = regime_check(p);
    RegimeThresholds strict;
    strict.small = 0.5 * base.n_ry_rc3;
    strict.rc_over_rry_max = 0.5 * base.rc_over_rry;
    strict.t_over_tmax_max = 0.5 * base.t_over_tmax;
    strict.rf_margin_min = 2.0 * base.rf_margin;
    strict.norm_defect_max = 0.5 * base.norm_defect.first;
    const RegimeReport r = regime_check(p, {}, strict);
    EXPECT_FALSE(r.n_ry_rc3_ok);
    EXPECT_FALSE(r.rc_over_rry_ok);
    EXPECT_FALSE(r.t_over_tmax_ok);
    EXPECT_FALSE(r.rf_margin_ok);
    EXPECT_FALSE(r.norm_defect_ok);
    EXPECT_TRUE(r.hard_failure());
}

TEST(Regime, DenseCloudIsHardFailure)
{
    PhysicalParams p = presets::rb87_sec5();
    p.density_n *= 100.0;
    EXPECT_TRUE(regime_check(p).hard_failure());
}

TEST(Regime, InvariantUnderUnitChange)
{
    const PhysicalParams p = presets::rb87_sec5();
    const double tau = 2e-6;
    const RegimeReport a = regime_check(p, {tau});
    for (auto [length, time] : std::vector<std::pair<double, double>>{{1e3, 1.0}, {1.0, 1e6}, {1e6, 1e-3}}) {
        const RegimeReport b = regime_check(scaled_units(p, length, time), {tau * time});
        EXPECT_NEAR(b.n_ry_rc3, a.n_ry_rc3, 1e-12 * a.n_ry_rc3);
        EXPECT_NEAR(b.rc_over_rry, a.rc_over_rry, 1e-12 * a.rc_over_rry);
        EXPECT_NEAR(b.t_over_tmax, a.t_over_tmax, 1e-12 * a.t_over_tmax);
        EXPECT_NEAR(b.rf_margin, a.rf_margin, 1e-9 * a.rf_margin);
        EXPECT_NEAR(b.norm_defect.first, a.norm_defect.first, 1e-12 * a.norm_defect.first);
        EXPECT_EQ(b.tau_loss_ok, a.tau_loss_ok);
    }
}
