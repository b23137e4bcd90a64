#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <rydpair/exact_oracle.hpp>

using namespace rydpair;

namespace {

AtomCloud pair_at_phase(double vt) { return cloud_from_z({0.0, std::cbrt(1.0 / vt)}); }

ManyBodyState basis_state(const std::vector<Level>& levels)
{
    ManyBodyState s(levels.size());
    s[0] = 0.0;
    s[s.index(levels)] = 1.0;
    return s;
}

double max_diff(const ManyBodyState& a, const ManyBodyState& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST(DarkState, ZeroProbeIsGround)
{
    const ManyBodyState s = build_dark_state(0.0, 4);
    EXPECT_EQ(s[0], Complex(1.0));
    EXPECT_NEAR(s.norm(), 1.0, 1e-15);
}

TEST(DarkState, SingleAtomEqualWeights)
{
    const ManyBodyState s = build_dark_state(1.0, 1);
    EXPECT_NEAR(s[s.index({Level::g})].real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[s.index({Level::s})].real(), -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(s[s.index({Level::p})], Complex(0.0));
}

TEST(DarkState, TwoExcitationAmplitude)
{
    const double eps = 0.1;
    const ManyBodyState s = build_dark_state(eps, 3);
    EXPECT_NEAR(s[s.index({Level::s, Level::s, Level::g})].real(), eps * eps * std::pow(1.0 + eps * eps, -1.5), 1e-15);
    EXPECT_NEAR(s.norm(), 1.0, 1e-14);
    EXPECT_THROW(build_dark_state(0.1, max_oracle_atoms + 1), InvalidInput);
}

TEST(Pulse, UnitaryAndDoubleApplication)
{
    for (auto conv : {PulseConvention::real_rotation, PulseConvention::rabi_phase}) {
        const PulseSpec p = PulseSpec::make(PulseKind::first_half_pi, conv);
        EXPECT_LT((p.unitary.adjoint() * p.unitary - Eigen::Matrix2cd::Identity()).norm(), 1e-14);
    }
    const PulseSpec p = PulseSpec::make(PulseKind::first_half_pi);
    const Eigen::Matrix2cd twice = p.unitary * p.unitary;
    // columns are images of s and p
    EXPECT_LT(std::abs(twice(1, 0) - 1.0), 1e-14);  // s -> p
    EXPECT_LT(std::abs(twice(0, 1) + 1.0), 1e-14);  // p -> -s
}

TEST(Pulse, ActsOnlyOnRydbergLevels)
{
    const ManyBodyState g = basis_state({Level::g, Level::g});
    EXPECT_EQ(max_diff(apply_half_pi(g, PulseSpec::make(PulseKind::first_half_pi)), g), 0.0);

    const ManyBodyState s = apply_half_pi(basis_state({Level::s}), PulseSpec::make(PulseKind::first_half_pi));
    EXPECT_NEAR(s[1].real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[2].real(), 1.0 / std::sqrt(2.0), 1e-15);

    const ManyBodyState p = apply_half_pi(s, PulseSpec::make(PulseKind::second_half_pi));
    EXPECT_NEAR(std::abs(p[2]), 1.0, 1e-15);
}

TEST(Pulse, SecondPulseMapsSymmetricCombinations)
{
    const double c = 1.0 / std::sqrt(2.0);
    ManyBodyState plus(1), minus(1);
    plus[0] = 0.0;
    minus[0] = 0.0;
    plus[1] = c;
    plus[2] = c;
    minus[1] = c;
    minus[2] = -c;
    const PulseSpec second = PulseSpec::make(PulseKind::second_half_pi);
    EXPECT_NEAR(std::abs(apply_half_pi(plus, second)[2]), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(apply_half_pi(minus, second)[1]), 1.0, 1e-15);
}

TEST(Evolve, ZeroTimeIsIdentity)
{
    const AtomCloud cloud = cloud_from_z({0.0, 0.7, 1.9});
    const ManyBodyState s = apply_half_pi(build_dark_state(0.4, 3), PulseSpec::make(PulseKind::first_half_pi));
    EXPECT_EQ(max_diff(evolve_rddi(s, cloud, Interaction{1.0, 0.0}), s), 0.0);
    EXPECT_LT(max_diff(RddiPropagator(cloud, Interaction{}).apply(s, 0.0), s), 1e-14);
}

TEST(Evolve, GroundAndSingleSpeciesStatesUnchanged)
{
    const AtomCloud cloud = cloud_from_z({0.0, 0.5, 1.1});
    for (const auto& levels : std::vector<std::vector<Level>>{
             {Level::g, Level::g, Level::g}, {Level::s, Level::s, Level::g}, {Level::p, Level::g, Level::p}}) {
        const ManyBodyState s = basis_state(levels);
        EXPECT_LT(max_diff(evolve_rddi(s, cloud), s), 1e-14);
    }
}

TEST(Evolve, TwoAtomsAtPhasePi)
{
    const ManyBodyState out = evolve_rddi(basis_state({Level::s, Level::p}), pair_at_phase(pi));
    EXPECT_NEAR(out[out.index({Level::s, Level::p})].real(), -1.0, 1e-12);
    EXPECT_NEAR(std::abs(out[out.index({Level::p, Level::s})]), 0.0, 1e-12);
}

TEST(Evolve, MatchesDenseMatrixExponential)
{
    const AtomCloud cloud = sample_cloud(Segment{2.5, 1.0}, 5, 77);
    const Eigen::MatrixXcd h = assemble_hamiltonian(cloud, Interaction{}).cast<Complex>();
    const Eigen::MatrixXcd u = (Complex(0.0, -1.0) * h).exp();
    const ManyBodyState in = apply_half_pi(build_dark_state(0.6, 5), PulseSpec::make(PulseKind::first_half_pi));
    Eigen::VectorXcd v(in.dimension());
    for (std::size_t i = 0; i < in.dimension(); ++i) v(i) = in[i];
    const Eigen::VectorXcd ref = u * v;
    const ManyBodyState out = evolve_rddi(in, cloud);
    double err = 0.0;
    for (std::size_t i = 0; i < in.dimension(); ++i) err += std::norm(out[i] - ref(i));
    EXPECT_LT(std::sqrt(err), 1e-10);
}

TEST(Evolve, RejectsCoincidentAtomsAndSizeMismatch)
{
    const ManyBodyState s = build_dark_state(0.1, 2);
    EXPECT_THROW(evolve_rddi(s, cloud_from_z({1.0, 1.0})), InvalidInput);
    EXPECT_THROW(evolve_rddi(s, cloud_from_z({0.0, 1.0, 2.0})), InvalidInput);
}

TEST(Hamiltonian, HermitianAndPermutationSymmetric)
{
    const AtomCloud cloud = sample_cloud(Segment{3.0, 1.0}, 4, 12);
    const Eigen::MatrixXd h = assemble_hamiltonian(cloud, Interaction{});
    EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);

    const std::vector<std::size_t> perm{2, 0, 3, 1};
    AtomCloud permuted = cloud;
    for (std::size_t j = 0; j < 4; ++j) permuted.positions[perm[j]] = cloud.positions[j];
    const Eigen::MatrixXd hp = assemble_hamiltonian(permuted, Interaction{});
    ManyBodyState probe(4);
    const std::size_t dim = probe.dimension();
    std::vector<std::size_t> map(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<Level> src(4), dst(4);
        for (std::size_t j = 0; j < 4; ++j) src[j] = probe.level(i, j);
        for (std::size_t j = 0; j < 4; ++j) dst[perm[j]] = src[j];
        map[i] = probe.index(dst);
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b) worst = std::max(worst, std::abs(h(a, b) - hp(map[a], map[b])));
    EXPECT_LT(worst, 1e-14);
}

TEST(PairPropagator, ClosedFormExamples)
{
    EXPECT_LT((exact_pair_propagator(0.0) - TwoAtomOperator::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    const TwoAtomOperator u = exact_pair_propagator(pi / 2);
    const int sp = 1 + 3 * 2, ps = 2 + 3 * 1;
    EXPECT_LT(std::abs(u(ps, sp) - Complex(0.0, -1.0)), 1e-15);
    EXPECT_LT(std::abs(u(sp, sp)), 1e-15);
}

TEST(PairPropagator, MatchesEvolveForTwoAtoms)
{
    Rng rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double v = rng.uniform(0.05, 5.0), t = rng.uniform(0.05, 2.0);
        const Interaction inter{v, t};
        const AtomCloud cloud = cloud_from_z({0.0, 1.0});
        const TwoAtomOperator closed = exact_pair_propagator(v * t);
        const RddiPropagator prop(cloud, inter);
        for (int col = 0; col < 9; ++col) {
            ManyBodyState e(2);
            e[0] = 0.0;
            e[static_cast<std::size_t>(col)] = 1.0;
            const ManyBodyState out = prop.apply(e);
            for (int row = 0; row < 9; ++row)
                worst = std::max(worst, std::abs(out[static_cast<std::size_t>(row)] - closed(row, col)));
        }
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Correlators, TrivialStates)
{
    const Correlators ground = measure_correlators(build_dark_state(0.0, 3));
    EXPECT_EQ(ground.g1.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(ground.g2.maxCoeff(), 0.0);

    const Correlators one = measure_correlators(basis_state({Level::s}));
    EXPECT_EQ(one.g1(0, 0), Complex(1.0));
    EXPECT_EQ(one.g2(0, 0), 0.0);
}

TEST(Correlators, StructureOfProtocolOutput)
{
    const AtomCloud cloud = sample_cloud(Segment{2.0, 1.0}, 5, 4);
    const Correlators c = measure_correlators(run_protocol(0.3, cloud).final_state);
    EXPECT_LT((c.g1 - c.g1.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((c.g2 - c.g2.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    for (int j = 0; j < 5; ++j) {
        EXPECT_EQ(c.g2(j, j), 0.0);
        EXPECT_NEAR(c.g1(j, j).real(), c.s_population(j), 1e-15);
    }
    EXPECT_GE(c.g2.minCoeff(), 0.0);
}

TEST(Protocol, UnitarityAndConservation)
{
    for (std::size_t n : {2u, 4u, 7u}) {
        const AtomCloud cloud = sample_cloud(Segment{2.0, 1.0}, n, 10 + n);
        const ProtocolRun run = run_protocol(0.5, cloud);
        for (const ManyBodyState* s : {&run.stored, &run.after_first_pulse, &run.after_evolution, &run.final_state})
            EXPECT_NEAR(s->norm(), 1.0, 1e-12);
        const auto before = excitation_counts(run.after_first_pulse);
        const auto after = excitation_counts(run.after_evolution);
        EXPECT_NEAR(before.first, after.first, 1e-12);
        EXPECT_NEAR(before.second, after.second, 1e-12);
    }
}

TEST(Protocol, NoInteractionNoRegeneratedLight)
{
    const AtomCloud cloud = sample_cloud(Segment{2.0, 1.0}, 5, 1);
    const Correlators c = measure_correlators(run_protocol(0.3, cloud, Interaction{0.0, 1.0}).final_state);
    EXPECT_LE(c.s_population.maxCoeff(), 1e-14);
}

TEST(Protocol, PulseConventionDoesNotChangeCorrelators)
{
    const AtomCloud cloud = sample_cloud(Segment{3.0, 1.0}, 5, 21);
    const Correlators a = measure_correlators(run_protocol(0.2, cloud).final_state);
    const Correlators b =
        measure_correlators(run_protocol(0.2, cloud, Interaction{}, PulseConvention::rabi_phase).final_state);
    EXPECT_LT((a.g2 - b.g2).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((a.g1 - b.g1).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((a.s_population - b.s_population).cwiseAbs().maxCoeff(), 1e-14);
}

// 1 - cos(VT) = O(T^2), so halving T quarters the regenerated population.
TEST(Protocol, RegeneratedPopulationIsQuadraticInT)
{
    const AtomCloud cloud = cloud_from_z({0.0, 0.9, 2.1, 3.0});
    auto total = [&](double t) {
        return measure_correlators(run_protocol(0.2, cloud, Interaction{1.0, t}).final_state).s_population.sum();
    };
    const double r1 = total(4e-4) / total(2e-4);
    const double r2 = total(2e-4) / total(1e-4);
    EXPECT_NEAR(r1, 4.0, 0.01);
    EXPECT_NEAR(r2, 4.0, 0.01);
}

TEST(PairExpansion, ExactForTwoAtoms)
{
    const AtomCloud cloud = cloud_from_z({0.0, 0.8});
    const ManyBodyState plus = apply_half_pi(build_dark_state(0.3, 2), PulseSpec::make(PulseKind::first_half_pi));
    EXPECT_LT(max_diff(pair_expanded_state(plus, cloud), evolve_rddi(plus, cloud)), 1e-14);
}

TEST(StateTable, OneLinePerConfiguration)
{
    std::ostringstream os;
    write_state_table(os, build_dark_state(0.1, 2));
    const std::string text = os.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
    EXPECT_EQ(text.rfind("config,real,imag\n", 0), 0u);
}
