#ifndef RYDPAIR_COMMON_HPP
#define RYDPAIR_COMMON_HPP

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace rydpair {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr Complex imag_unit{0.0, 1.0};

/** Raised when an input violates a documented precondition. */
class InvalidInput : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Seeded generator with a platform-independent uniform mapping.
 *
 * std::uniform_real_distribution is implementation defined, so the
 * double is built from the top 53 bits of mt19937_64 directly.
 */
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : m_engine(seed) {}

    /* uniform on [0, 1) */
    double uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 m_engine;
};

/**
 * Runs body(i) for i in [0, count) on up to `threads` workers. Each index
 * is processed exactly once and results are expected to be stored by
 * index, so output does not depend on the thread count.
 */
template<class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body)
{
    threads = std::max(1u, threads);
    if (threads == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, count);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/* Evenly spaced grid including both end points. */
inline std::vector<double> linspace(double lo, double hi, std::size_t count)
{
    if (count < 2) throw InvalidInput("linspace needs at least two points");
    std::vector<double> grid(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

} // namespace rydpair

#endif
