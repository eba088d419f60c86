#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urv/core.hpp"
#include "urv/refine.hpp"

namespace urv {

enum class MatrixFormat { Auto, MatrixMarket, Csv };

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line)
    {
    }

    int line() const { return line_; }

private:
    int line_;
};

namespace detail {

inline std::string_view trimmed(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

inline double parseDouble(std::string_view token, int line)
{
    token = trimmed(token);
    if (token.empty()) {
        throw ParseError(line, "empty numeric token");
    }
    if (token.front() == '+') {  // from_chars rejects an explicit leading sign
        token.remove_prefix(1);
    }
    double value = 0.0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(line, "non-numeric token '" + std::string(token) + "'");
    }
    if (!std::isfinite(value)) {
        throw ParseError(line, "non-finite value '" + std::string(token) + "'");
    }
    return value;
}

inline std::string lowered(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace detail

/// Parses the MatrixMarket dense format: banner
/// "%%MatrixMarket matrix array real general", optional % comments, a
/// "rows cols" size line, then rows*cols values in column-major order.
inline Matrix parseMatrixMarket(std::istream& in)
{
    std::string line;
    int lineNo = 0;

    if (!std::getline(in, line)) {
        throw ParseError(1, "empty file, expected MatrixMarket banner");
    }
    ++lineNo;
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (detail::lowered(tag) != "%%matrixmarket" || detail::lowered(object) != "matrix" ||
        detail::lowered(format) != "array" || detail::lowered(field) != "real" ||
        detail::lowered(symmetry) != "general") {
        throw ParseError(lineNo,
                         "unsupported MatrixMarket banner; expected "
                         "'%%MatrixMarket matrix array real general'");
    }

    Index rows = 0;
    Index cols = 0;
    while (true) {
        if (!std::getline(in, line)) {
            throw ParseError(lineNo, "missing size line");
        }
        ++lineNo;
        const auto t = detail::trimmed(line);
        if (t.empty() || t.front() == '%') {
            continue;
        }
        std::istringstream sizes{std::string(t)};
        if (!(sizes >> rows >> cols) || rows < 1 || cols < 1) {
            throw ParseError(lineNo, "malformed size line '" + std::string(t) + "'");
        }
        std::string extra;
        if (sizes >> extra) {
            throw ParseError(lineNo, "unexpected token '" + extra + "' on size line");
        }
        break;
    }

    Matrix m(rows, cols);
    Index count = 0;
    const Index total = rows * cols;
    while (count < total) {
        if (!std::getline(in, line)) {
            throw ParseError(lineNo, "unexpected end of file, expected " +
                                         std::to_string(total - count) + " more entries");
        }
        ++lineNo;
        const auto t = detail::trimmed(line);
        if (t.empty()) {
            continue;
        }
        std::istringstream tokens{std::string(t)};
        std::string token;
        while (tokens >> token) {
            if (count >= total) {
                throw ParseError(lineNo, "more entries than rows*cols");
            }
            const double value = detail::parseDouble(token, lineNo);
            m(count % rows, count / rows) = value;  // column-major body
            ++count;
        }
    }
    while (std::getline(in, line)) {
        ++lineNo;
        if (!detail::trimmed(line).empty()) {
            throw ParseError(lineNo, "more entries than rows*cols");
        }
    }
    return m;
}

/// Dense CSV: one row per line, comma-separated decimal values.
inline Matrix parseCsv(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (detail::trimmed(line).empty()) {
            continue;
        }
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view token =
                std::string_view(line).substr(start, comma == std::string::npos
                                                         ? std::string::npos
                                                         : comma - start);
            row.push_back(detail::parseDouble(token, lineNo));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError(lineNo, "ragged row: expected " +
                                         std::to_string(rows.front().size()) + " values, got " +
                                         std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ParseError(lineNo == 0 ? 1 : lineNo, "no data rows");
    }
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return m;
}

inline Matrix parseMatrix(std::istream& in, MatrixFormat format = MatrixFormat::Auto)
{
    std::ostringstream slurp;
    slurp << in.rdbuf();
    std::istringstream buffered(slurp.str());
    if (format == MatrixFormat::Auto) {
        format = detail::lowered(slurp.str().substr(0, 14)) == "%%matrixmarket"
                     ? MatrixFormat::MatrixMarket
                     : MatrixFormat::Csv;
    }
    return format == MatrixFormat::MatrixMarket ? parseMatrixMarket(buffered)
                                                : parseCsv(buffered);
}

inline Matrix parseMatrix(const std::filesystem::path& path,
                          MatrixFormat format = MatrixFormat::Auto)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    return parseMatrix(in, format);
}

/// %.17g always round-trips to the same double; used for CSV output.
inline std::string formatDouble(double value, int significantDigits = 17)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", significantDigits, value);
    return buffer;
}

inline void writeCsv(std::ostream& out, const Matrix& m)
{
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << formatDouble(m(i, j));
        }
        out << '\n';
    }
}

/// One trace line per half-sweep, as a JSON object whose decimal fields
/// round-trip to the exact binary double.
inline nlohmann::json traceLine(const IterationRecord<double>& record)
{
    nlohmann::json j;
    j["l"] = record.l;
    j["e"] = record.e;
    j["h_norm"] = record.hNorm;
    j["rho"] = record.rho ? nlohmann::json(*record.rho) : nlohmann::json(nullptr);
    j["corner_flipped"] = record.cornerFlipped;
    return j;
}

inline IterationRecord<double> parseTraceLine(const nlohmann::json& j)
{
    IterationRecord<double> record;
    record.l = j.at("l").get<Index>();
    record.e = j.at("e").get<double>();
    record.hNorm = j.at("h_norm").get<double>();
    record.rho = j.at("rho").is_null() ? std::nullopt
                                       : std::optional<double>(j.at("rho").get<double>());
    record.cornerFlipped = j.at("corner_flipped").get<bool>();
    return record;
}

inline void writeTrace(std::ostream& out, const std::vector<IterationRecord<double>>& history)
{
    for (const auto& record : history) {
        out << traceLine(record).dump() << '\n';
    }
}

}  // namespace urv
