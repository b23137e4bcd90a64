#ifndef RYDPAIR_SERIES_HPP
#define RYDPAIR_SERIES_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <rydpair/common.hpp>

namespace rydpair {

enum class GridKind { tau, z, k, omega };

enum class Normalization { raw, input_intensity };

inline const char* to_string(GridKind kind)
{
    switch (kind) {
    case GridKind::tau: return "tau";
    case GridKind::z: return "z";
    case GridKind::k: return "k";
    case GridKind::omega: return "omega";
    }
    return "?";
}

inline const char* to_string(Normalization n)
{
    return n == Normalization::raw ? "raw" : "input-intensity-normalized";
}

/**
 * Sampled function on a tagged grid. `gap[i]` marks points where no value
 * could be formed (e.g. no atom pair fell in the averaging band); the
 * value there is NaN. `pair_count` is filled by band-averaged series.
 */
struct CorrelationSeries
{
    GridKind grid_kind = GridKind::tau;
    Normalization normalization = Normalization::raw;
    std::string units;
    std::vector<double> grid;
    std::vector<Complex> values;
    std::vector<std::uint8_t> gap;
    std::vector<std::size_t> pair_count;
    /* set when a transform had to window the input */
    bool windowed = false;

    std::size_t size() const { return grid.size(); }

    bool has_gaps() const
    {
        for (auto g : gap)
            if (g) return true;
        return false;
    }

    std::vector<double> real_values() const
    {
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
        return out;
    }

    void validate() const
    {
        if (values.size() != grid.size()) throw InvalidInput("CorrelationSeries: grid and values differ in length");
        if (!gap.empty() && gap.size() != grid.size()) throw InvalidInput("CorrelationSeries: gap mask length");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1])) throw InvalidInput("CorrelationSeries: grid must be strictly increasing");
    }
};

inline CorrelationSeries make_series(GridKind kind, std::vector<double> grid, Normalization norm = Normalization::raw)
{
    CorrelationSeries s;
    s.grid_kind = kind;
    s.normalization = norm;
    s.grid = std::move(grid);
    s.values.assign(s.grid.size(), Complex{});
    s.gap.assign(s.grid.size(), 0);
    for (std::size_t i = 1; i < s.grid.size(); ++i)
        if (!(s.grid[i] > s.grid[i - 1])) throw InvalidInput("series grid must be strictly increasing");
    return s;
}

} // namespace rydpair

#endif
