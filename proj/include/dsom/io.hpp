#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dsom/matrix.hpp"

namespace dsom {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Shortest decimal form that parses back to the exact same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view tok, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw io_error(context + ": cannot parse number '" + std::string(tok) + "'");
    return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace detail

inline constexpr const char* matrix_format_header = "DSOM-DISSIM 1";

/// Writes the dissimilarity matrix file format:
///   line 1: DSOM-DISSIM 1
///   line 2: n
///   lines 3..n+2: full row-major matrix, space-separated decimal reals.
/// Serialization is lossless: save followed by load reproduces every stored
/// double exactly.
inline void save_matrix(const DissimilarityMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary: LF line endings everywhere
    if (!out) throw io_error("save_matrix: cannot open '" + path + "' for writing");
    out << matrix_format_header << '\n' << m.size() << '\n';
    const std::int32_t n = m.size();
    std::string line;
    for (std::int32_t i = 0; i < n; ++i) {
        line.clear();
        for (std::int32_t k = 0; k < n; ++k) {
            if (k > 0) line += ' ';
            line += detail::format_double(m.at(i, k));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw io_error("save_matrix: write failure on '" + path + "'");
}

/// Parses and validates a matrix file. Each structural defect gets its own
/// diagnostic: bad header, bad size line, wrong row count or row width,
/// negative entries, nonzero diagonal, asymmetric pairs.
inline DissimilarityMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_matrix: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || detail::strip_cr(line) != matrix_format_header)
        throw io_error("load_matrix: '" + path + "': missing or unrecognized header (expected '" +
                       std::string(matrix_format_header) + "')");
    if (!std::getline(in, line)) throw io_error("load_matrix: '" + path + "': missing size line");
    std::int64_t n = 0;
    {
        const std::string sline = detail::strip_cr(line);
        const auto res = std::from_chars(sline.data(), sline.data() + sline.size(), n);
        if (res.ec != std::errc() || res.ptr != sline.data() + sline.size() || n <= 0)
            throw io_error("load_matrix: '" + path + "': invalid size line '" + sline + "'");
    }
    const auto un = static_cast<std::size_t>(n);
    std::vector<double> values(un * un);
    for (std::size_t i = 0; i < un; ++i) {
        if (!std::getline(in, line))
            throw io_error("load_matrix: '" + path + "': expected " + std::to_string(n) +
                           " data rows, found " + std::to_string(i));
        const std::string row_line = detail::strip_cr(line);
        const auto toks = detail::split_ws(row_line);
        if (toks.size() != un)
            throw io_error("load_matrix: '" + path + "': row " + std::to_string(i) + " has " +
                           std::to_string(toks.size()) + " entries, expected " + std::to_string(n) +
                           " (non-square data)");
        for (std::size_t k = 0; k < un; ++k)
            values[i * un + k] =
                detail::parse_double(toks[k], "load_matrix: '" + path + "' row " + std::to_string(i));
    }
    // Entry-level validation with named offenders, before handing off to the
    // matrix constructor.
    for (std::size_t i = 0; i < un; ++i) {
        if (values[i * un + i] != 0.0)
            throw io_error("load_matrix: '" + path + "': nonzero diagonal at index " + std::to_string(i) +
                           " (value " + detail::format_double(values[i * un + i]) + ")");
        for (std::size_t k = 0; k < un; ++k) {
            if (values[i * un + k] < 0.0)
                throw io_error("load_matrix: '" + path + "': negative entry at (" + std::to_string(i) +
                               "," + std::to_string(k) + ")");
            if (k > i && values[i * un + k] != values[k * un + i])
                throw io_error("load_matrix: '" + path + "': asymmetric pair (" + std::to_string(i) + "," +
                               std::to_string(k) + "): " + detail::format_double(values[i * un + k]) +
                               " vs " + detail::format_double(values[k * un + i]));
        }
    }
    const ValueKind kind = DissimilarityMatrix::detect_kind(values);
    return DissimilarityMatrix(static_cast<std::int32_t>(n), std::move(values), kind);
}

/// Point set file: CSV, one observation per row, no header.
inline void save_points(const PointSet& ps, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("save_points: cannot open '" + path + "' for writing");
    for (std::int32_t i = 0; i < ps.n; ++i) {
        std::string line;
        for (std::int32_t t = 0; t < ps.dim; ++t) {
            if (t > 0) line += ',';
            line += detail::format_double(ps.at(i, t));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw io_error("save_points: write failure on '" + path + "'");
}

inline PointSet load_points(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_points: cannot open '" + path + "'");
    PointSet ps;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::string_view tok =
                std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                : comma - start);
            row.push_back(detail::parse_double(tok, "load_points: '" + path + "' line " +
                                                        std::to_string(lineno)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (ps.dim == 0) {
            ps.dim = static_cast<std::int32_t>(row.size());
        } else if (static_cast<std::int32_t>(row.size()) != ps.dim) {
            throw io_error("load_points: '" + path + "' line " + std::to_string(lineno) +
                           ": inconsistent column count");
        }
        ps.coords.insert(ps.coords.end(), row.begin(), row.end());
        ++ps.n;
    }
    if (ps.n == 0) throw io_error("load_points: '" + path + "': no data rows");
    return ps;
}

/// Word list: one word per line, UTF-8, blank lines ignored.
inline std::vector<std::string> load_words(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_words: cannot open '" + path + "'");
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::strip_cr(line);
        if (!line.empty()) words.push_back(line);
    }
    if (words.empty()) throw io_error("load_words: '" + path + "': no words");
    return words;
}

} // namespace dsom
