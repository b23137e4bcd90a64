#ifndef RYDPAIR_EXACT_ORACLE_HPP
#define RYDPAIR_EXACT_ORACLE_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include <rydpair/common.hpp>
#include <rydpair/ensemble.hpp>

/*
 * Brute-force evolution of N three-level atoms {g, s, p} through the
 * storage / pi-half / interaction / pi-half sequence. Configurations are
 * base-3 numbers, atom j being digit j with g = 0, s = 1, p = 2.
 */

namespace rydpair {

enum class Level : int { g = 0, s = 1, p = 2 };

inline constexpr std::size_t max_oracle_atoms = 12;

inline std::size_t pow3(std::size_t n)
{
    std::size_t v = 1;
    for (std::size_t i = 0; i < n; ++i) v *= 3;
    return v;
}

class ManyBodyState
{
public:
    /* all atoms in g */
    explicit ManyBodyState(std::size_t atom_count) : m_atoms(atom_count)
    {
        if (atom_count < 1) throw InvalidInput("ManyBodyState: at least one atom required");
        if (atom_count > max_oracle_atoms) throw InvalidInput("ManyBodyState: atom count above memory cap");
        m_stride.resize(atom_count);
        for (std::size_t j = 0; j < atom_count; ++j) m_stride[j] = pow3(j);
        m_amps.assign(pow3(atom_count), Complex{});
        m_amps[0] = 1.0;
    }

    std::size_t atom_count() const { return m_atoms; }
    std::size_t dimension() const { return m_amps.size(); }

    std::size_t stride(std::size_t atom) const { return m_stride[atom]; }

    Level level(std::size_t config, std::size_t atom) const
    {
        return static_cast<Level>((config / m_stride[atom]) % 3);
    }

    std::size_t index(const std::vector<Level>& levels) const
    {
        if (levels.size() != m_atoms) throw InvalidInput("ManyBodyState::index: wrong number of levels");
        std::size_t idx = 0;
        for (std::size_t j = 0; j < m_atoms; ++j) idx += m_stride[j] * static_cast<std::size_t>(levels[j]);
        return idx;
    }

    Complex& operator[](std::size_t config) { return m_amps[config]; }
    const Complex& operator[](std::size_t config) const { return m_amps[config]; }

    Complex amplitude(const std::vector<Level>& levels) const { return m_amps[index(levels)]; }

    std::vector<Complex>& amplitudes() { return m_amps; }
    const std::vector<Complex>& amplitudes() const { return m_amps; }

    double norm() const
    {
        double sum = 0.0;
        for (const auto& a : m_amps) sum += std::norm(a);
        return std::sqrt(sum);
    }

    /* <this|other> */
    Complex overlap(const ManyBodyState& other) const
    {
        Complex sum{};
        for (std::size_t i = 0; i < m_amps.size(); ++i) sum += std::conj(m_amps[i]) * other.m_amps[i];
        return sum;
    }

private:
    std::size_t m_atoms;
    std::vector<std::size_t> m_stride;
    std::vector<Complex> m_amps;
};

/*
 * Product state A^N prod_j (1 - eps sigma_sg^j)|g...g>: every atom carries
 * (A, -A eps, 0) on (g, s, p).
 */
inline ManyBodyState build_dark_state(double epsilon, std::size_t atom_count)
{
    if (!(epsilon >= 0.0)) throw InvalidInput("build_dark_state: epsilon must be non-negative");
    ManyBodyState state(atom_count);
    const double A = dark_state_norm(epsilon);
    const std::array<double, 3> single{A, -A * epsilon, 0.0};
    auto& amps = state.amplitudes();
    amps[0] = 1.0;
    // grow the product one atom at a time
    std::size_t filled = 1;
    for (std::size_t j = 0; j < atom_count; ++j) {
        for (std::size_t d = 2; d >= 1; --d)
            for (std::size_t i = 0; i < filled; ++i) amps[d * filled + i] = amps[i] * single[d];
        for (std::size_t i = 0; i < filled; ++i) amps[i] *= single[0];
        filled *= 3;
    }
    return state;
}

enum class PulseKind { first_half_pi, second_half_pi };

/* Phase convention of the microwave rotation on {s, p}. */
enum class PulseConvention {
    real_rotation, // s -> (s + p)/sqrt2, p -> (p - s)/sqrt2
    rabi_phase     // exp(-i pi/4 (sigma_ps + sigma_sp)): s -> (s - i p)/sqrt2
};

struct PulseSpec
{
    PulseKind kind = PulseKind::first_half_pi;
    /* acts on (s, p) amplitudes; identity on g */
    Eigen::Matrix2cd unitary = Eigen::Matrix2cd::Identity();

    static PulseSpec make(PulseKind kind, PulseConvention convention = PulseConvention::real_rotation)
    {
        const double c = 1.0 / std::sqrt(2.0);
        PulseSpec pulse;
        pulse.kind = kind;
        if (convention == PulseConvention::real_rotation) {
            pulse.unitary << c, -c, c, c;
        } else {
            pulse.unitary << Complex(c, 0.0), Complex(0.0, -c), Complex(0.0, -c), Complex(c, 0.0);
        }
        return pulse;
    }
};

inline ManyBodyState apply_half_pi(ManyBodyState state, const PulseSpec& pulse)
{
    const auto& u = pulse.unitary;
    auto& amps = state.amplitudes();
    const std::size_t dim = state.dimension();
    for (std::size_t j = 0; j < state.atom_count(); ++j) {
        const std::size_t stride = state.stride(j);
        for (std::size_t i = 0; i < dim; ++i) {
            if (state.level(i, j) != Level::s) continue;
            const std::size_t ip = i + stride;
            const Complex as = amps[i];
            const Complex ap = amps[ip];
            amps[i] = u(0, 0) * as + u(0, 1) * ap;
            amps[ip] = u(1, 0) * as + u(1, 1) * ap;
        }
    }
    return state;
}

/* V(|r_j - r_j'|) T for every pair, symmetric with zero diagonal. */
inline Eigen::MatrixXd pair_phases(const AtomCloud& cloud, const Interaction& interaction)
{
    const std::size_t n = cloud.size();
    Eigen::MatrixXd phases = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double r = cloud.distance(a, b);
            if (!(r > 0.0)) throw InvalidInput("coincident atom positions");
            phases(a, b) = phases(b, a) = interaction.phase(r);
        }
    return phases;
}

/**
 * Dense H_at-at T = sum_{j != j'} V T sigma_ps^j sigma_sp^j' on the full
 * 3^N space. Intended for small N checks only.
 */
inline Eigen::MatrixXd assemble_hamiltonian(const AtomCloud& cloud, const Interaction& interaction)
{
    const std::size_t n = cloud.size();
    if (n > 7) throw InvalidInput("assemble_hamiltonian: dense assembly limited to 7 atoms");
    const Eigen::MatrixXd phases = pair_phases(cloud, interaction);
    ManyBodyState layout(n);
    const std::size_t dim = layout.dimension();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b || layout.level(i, a) != Level::s || layout.level(i, b) != Level::p) continue;
                // atom a: s -> p, atom b: p -> s
                const std::size_t k = i + layout.stride(a) - layout.stride(b);
                h(k, i) += phases(a, b);
            }
    return h;
}

/**
 * Exact propagator exp(-i H_at-at T) for a fixed cloud.
 *
 * The exchange term conserves which atoms are excited (g atoms never
 * move) and the number of s excitations among them, so H splits into
 * blocks labelled by (Rydberg subset, s count). Each block is real
 * symmetric with dimension C(m, k) and is diagonalized once.
 */
class RddiPropagator
{
public:
    RddiPropagator(const AtomCloud& cloud, const Interaction& interaction)
    {
        const std::size_t n = cloud.size();
        if (n < 1 || n > max_oracle_atoms) throw InvalidInput("RddiPropagator: unsupported atom count");
        m_atoms = n;
        const Eigen::MatrixXd phases = pair_phases(cloud, interaction);
        ManyBodyState layout(n);

        for (std::uint32_t ryd = 1; ryd < (1u << n); ++ryd) {
            const int m = std::popcount(ryd);
            if (m < 2) continue;
            std::vector<std::size_t> members;
            for (std::size_t j = 0; j < n; ++j)
                if (ryd & (1u << j)) members.push_back(j);

            std::map<int, std::vector<std::uint32_t>> by_count;
            for (std::uint32_t local = 0; local < (1u << m); ++local) by_count[std::popcount(local)].push_back(local);

            for (auto& [k, locals] : by_count) {
                if (k == 0 || k == m) continue;
                Sector sector;
                const std::size_t d = locals.size();
                sector.configs.resize(d);
                std::map<std::uint32_t, std::size_t> position;
                for (std::size_t a = 0; a < d; ++a) {
                    position[locals[a]] = a;
                    std::size_t idx = 0;
                    for (int t = 0; t < m; ++t) {
                        const bool is_s = locals[a] & (1u << t);
                        idx += layout.stride(members[t]) * (is_s ? 1 : 2);
                    }
                    sector.configs[a] = idx;
                }
                Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
                for (std::size_t a = 0; a < d; ++a) {
                    const std::uint32_t s_mask = locals[a];
                    for (int x = 0; x < m; ++x) {
                        if (!(s_mask & (1u << x))) continue;
                        for (int y = 0; y < m; ++y) {
                            if (s_mask & (1u << y)) continue;
                            const std::uint32_t moved = (s_mask & ~(1u << x)) | (1u << y);
                            h(position[moved], a) = phases(members[x], members[y]);
                        }
                    }
                }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
                sector.eigenvalues = solver.eigenvalues();
                sector.eigenvectors = solver.eigenvectors();
                m_sectors.push_back(std::move(sector));
            }
        }
    }

    std::size_t atom_count() const { return m_atoms; }
    std::size_t sector_count() const { return m_sectors.size(); }

    /* Applies exp(-i H t) with t in units of the storage time used to build the phases. */
    ManyBodyState apply(ManyBodyState state, double t = 1.0) const
    {
        if (state.atom_count() != m_atoms) throw InvalidInput("RddiPropagator: atom count mismatch");
        if (t == 0.0) return state;
        auto& amps = state.amplitudes();
        for (const auto& sector : m_sectors) {
            const Eigen::Index d = static_cast<Eigen::Index>(sector.configs.size());
            Eigen::VectorXcd v(d);
            bool empty = true;
            for (Eigen::Index a = 0; a < d; ++a) {
                v(a) = amps[sector.configs[a]];
                if (v(a) != Complex{}) empty = false;
            }
            if (empty) continue;
            Eigen::VectorXcd w = sector.eigenvectors.transpose() * v;
            for (Eigen::Index a = 0; a < d; ++a) w(a) *= std::exp(Complex(0.0, -sector.eigenvalues(a) * t));
            v = sector.eigenvectors * w;
            for (Eigen::Index a = 0; a < d; ++a) amps[sector.configs[a]] = v(a);
        }
        return state;
    }

private:
    struct Sector
    {
        std::vector<std::size_t> configs;
        Eigen::VectorXd eigenvalues;
        Eigen::MatrixXd eigenvectors;
    };

    std::size_t m_atoms = 0;
    std::vector<Sector> m_sectors;
};

/* exp(-i H_at-at T)|state> for the positions in `cloud`. */
inline ManyBodyState evolve_rddi(const ManyBodyState& state, const AtomCloud& cloud,
                                 const Interaction& interaction = {})
{
    if (cloud.size() != state.atom_count()) throw InvalidInput("evolve_rddi: cloud and state sizes differ");
    if (interaction.storage_T == 0.0) return state;
    return RddiPropagator(cloud, interaction).apply(state);
}

/* Two-atom basis order used by the 9x9 operators: index = d0 + 3 d1. */
using TwoAtomOperator = Eigen::Matrix<Complex, 9, 9>;

/**
 * Closed-form two-atom propagator
 *   1 + sum_{j != j'} {(cos VT - 1) sigma_pp^j sigma_ss^j' - i sin VT sigma_ps^j sigma_sp^j'}.
 */
inline TwoAtomOperator exact_pair_propagator(double phase)
{
    TwoAtomOperator u = TwoAtomOperator::Identity();
    const auto idx = [](Level a0, Level a1) { return static_cast<int>(a0) + 3 * static_cast<int>(a1); };
    const int sp = idx(Level::s, Level::p);
    const int ps = idx(Level::p, Level::s);
    const double c = std::cos(phase) - 1.0;
    const double s = std::sin(phase);
    // (j, j') = (0, 1) and (1, 0)
    u(ps, ps) += c;
    u(sp, sp) += c;
    u(ps, sp) += Complex(0.0, -s);
    u(sp, ps) += Complex(0.0, -s);
    return u;
}

struct Correlators
{
    Eigen::MatrixXcd g1;            // <sigma_gs^j dag sigma_gs^j'>
    Eigen::MatrixXd g2;             // <sigma_gs^j dag sigma_gs^j' dag sigma_gs^j' sigma_gs^j>
    Eigen::VectorXd s_population;
    Eigen::VectorXd p_population;
};

inline Correlators measure_correlators(const ManyBodyState& state)
{
    const std::size_t n = state.atom_count();
    const std::size_t dim = state.dimension();
    Correlators out;
    out.g1 = Eigen::MatrixXcd::Zero(n, n);
    out.g2 = Eigen::MatrixXd::Zero(n, n);
    out.s_population = Eigen::VectorXd::Zero(n);
    out.p_population = Eigen::VectorXd::Zero(n);

    std::vector<std::size_t> s_atoms;
    s_atoms.reserve(n);
    for (std::size_t i = 0; i < dim; ++i) {
        const Complex amp = state[i];
        if (amp == Complex{}) continue;
        const double prob = std::norm(amp);
        s_atoms.clear();
        for (std::size_t j = 0; j < n; ++j) {
            const Level l = state.level(i, j);
            if (l == Level::s) {
                s_atoms.push_back(j);
                out.s_population(j) += prob;
            } else if (l == Level::p) {
                out.p_population(j) += prob;
            }
        }
        for (std::size_t a : s_atoms)
            for (std::size_t b : s_atoms)
                if (a != b) out.g2(a, b) += prob;
        // sigma_sg^j sigma_gs^j' moves the s excitation from j' to j (j in g)
        for (std::size_t jp : s_atoms) {
            for (std::size_t j = 0; j < n; ++j) {
                if (state.level(i, j) != Level::g) continue;
                const std::size_t target = i - state.stride(jp) + state.stride(j);
                out.g1(j, jp) += std::conj(state[target]) * amp;
            }
        }
    }
    for (std::size_t j = 0; j < n; ++j) out.g1(j, j) = out.s_population(j);
    return out;
}

/* Expected total s and p counts. */
inline std::pair<double, double> excitation_counts(const ManyBodyState& state)
{
    double ns = 0.0, np = 0.0;
    for (std::size_t i = 0; i < state.dimension(); ++i) {
        const double prob = std::norm(state[i]);
        if (prob == 0.0) continue;
        for (std::size_t j = 0; j < state.atom_count(); ++j) {
            const Level l = state.level(i, j);
            if (l == Level::s) ns += prob;
            if (l == Level::p) np += prob;
        }
    }
    return {ns, np};
}

/* Intermediate states of one protocol run, kept for step-wise checks. */
struct ProtocolRun
{
    ManyBodyState stored;
    ManyBodyState after_first_pulse;
    ManyBodyState after_evolution;
    ManyBodyState final_state;
};

inline ProtocolRun run_protocol(double epsilon, const AtomCloud& cloud, const Interaction& interaction = {},
                                PulseConvention convention = PulseConvention::real_rotation)
{
    ManyBodyState stored = build_dark_state(epsilon, cloud.size());
    ManyBodyState plus = apply_half_pi(stored, PulseSpec::make(PulseKind::first_half_pi, convention));
    ManyBodyState evolved = evolve_rddi(plus, cloud, interaction);
    ManyBodyState fin = apply_half_pi(evolved, PulseSpec::make(PulseKind::second_half_pi, convention));
    return {std::move(stored), std::move(plus), std::move(evolved), std::move(fin)};
}

/**
 * Truncated pair expansion
 *   |Psi+> + sum_{j != j'} [exp(-i V T) - 1] sigma_ps^j sigma_sp^j' |Psi+>
 * built directly in the configuration basis.
 */
inline ManyBodyState pair_expanded_state(const ManyBodyState& plus, const AtomCloud& cloud,
                                         const Interaction& interaction = {})
{
    const std::size_t n = plus.atom_count();
    if (cloud.size() != n) throw InvalidInput("pair_expanded_state: cloud and state sizes differ");
    const Eigen::MatrixXd phases = pair_phases(cloud, interaction);
    ManyBodyState out = plus;
    for (std::size_t i = 0; i < plus.dimension(); ++i) {
        const Complex amp = plus[i];
        if (amp == Complex{}) continue;
        for (std::size_t a = 0; a < n; ++a) {
            if (plus.level(i, a) != Level::s) continue;
            for (std::size_t b = 0; b < n; ++b) {
                if (b == a || plus.level(i, b) != Level::p) continue;
                const std::size_t k = i + plus.stride(a) - plus.stride(b);
                out[k] += (std::exp(Complex(0.0, -phases(a, b))) - 1.0) * amp;
            }
        }
    }
    return out;
}

/* Debug export: one "index,real,imag" line per configuration. */
inline void write_state_table(std::ostream& os, const ManyBodyState& state)
{
    os << "config,real,imag\n";
    os.precision(17);
    for (std::size_t i = 0; i < state.dimension(); ++i)
        os << i << ',' << state[i].real() << ',' << state[i].imag() << '\n';
}

} // namespace rydpair

#endif
