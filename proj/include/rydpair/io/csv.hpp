#ifndef RYDPAIR_IO_CSV_HPP
#define RYDPAIR_IO_CSV_HPP

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <rydpair/common.hpp>

namespace rydpair::io {

/* Shortest round-trip decimal form; identical across runs and thread counts. */
inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/**
 * CSV file whose first line is "# " followed by a one-line JSON header,
 * then a column line, then data rows.
 */
class CsvWriter
{
public:
    CsvWriter(const std::filesystem::path& path, const nlohmann::json& header, const std::vector<std::string>& columns)
        : m_out(path, std::ios::binary)
    {
        if (!m_out) throw std::runtime_error("cannot open " + path.string() + " for writing");
        m_out << "# " << header.dump() << '\n';
        write_cells(columns);
    }

    void row(const std::vector<std::string>& cells) { write_cells(cells); }

    void row(const std::vector<double>& values)
    {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_number(v));
        write_cells(cells);
    }

private:
    void write_cells(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) m_out << ',';
            m_out << cells[i];
        }
        m_out << '\n';
    }

    std::ofstream m_out;
};

/* Lines of a CSV file that are not '#' header lines. */
inline std::string csv_body(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line, body;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '#') continue;
        body += line;
        body += '\n';
    }
    return body;
}

} // namespace rydpair::io

#endif
