#pragma once

// Sweep tables on disk: CSV and JSON writers with shortest round-trip number
// formatting, a reader that accepts either, and two-column plot data.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "cqtf/asymptotics.hpp"

namespace cqtf {

enum class SweepKind { thermo, tf_limit };

struct SweepTable {
    SweepKind kind = SweepKind::thermo;
    std::vector<SweepRow> rows;
};

/// Raised for unreadable or malformed tables.
class table_error : public validation_error {
public:
    using validation_error::validation_error;
};

inline std::vector<std::string> table_columns(SweepKind kind) {
    std::vector<std::string> cols{kind == SweepKind::thermo ? "L" : "N",
                                  "eps", "energy", "energy_gap", "mu", "mu_gap", "kinetic",
                                  "linf_err_interior", "tail_probe", "laplacian_sup", "iterations", "residual"};
    if (kind == SweepKind::tf_limit) cols.push_back("truncation_delta");
    return cols;
}

/// Shortest decimal that reads back to the same double; "nan", "inf", "-inf"
/// for the non-finite values.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

namespace detail {

inline std::vector<double> row_values(const SweepRow& r, SweepKind kind) {
    std::vector<double> v{r.control, r.eps, r.energy, r.energy_gap, r.mu, r.mu_gap, r.kinetic,
                          r.linf_err_interior, r.tail_probe, r.laplacian_sup,
                          static_cast<double>(r.iterations), r.residual};
    if (kind == SweepKind::tf_limit) v.push_back(r.truncation_delta);
    return v;
}

inline SweepRow row_from_values(const std::vector<double>& v, SweepKind kind) {
    SweepRow r;
    r.control = v[0];
    r.eps = v[1];
    r.energy = v[2];
    r.energy_gap = v[3];
    r.mu = v[4];
    r.mu_gap = v[5];
    r.kinetic = v[6];
    r.linf_err_interior = v[7];
    r.tail_probe = v[8];
    r.laplacian_sup = v[9];
    if (!(v[10] >= 0.0) || v[10] != std::floor(v[10]) || v[10] > 2e9)
        throw table_error("iterations must be a non-negative integer");
    r.iterations = static_cast<int>(v[10]);
    r.residual = v[11];
    if (kind == SweepKind::tf_limit) {
        r.truncation_delta = v[12];
        r.truncation_ok = !(r.truncation_delta > 1e-8);
    }
    return r;
}

inline double parse_number(std::string_view s, std::size_t line) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
        throw table_error("line " + std::to_string(line) + ": not a number: '" + std::string(s) + "'");
    return x;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace detail

inline void write_csv(std::ostream& os, const SweepTable& t) {
    const auto cols = table_columns(t.kind);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : t.rows) {
        const auto v = detail::row_values(r, t.kind);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << ',';
            if (i == 10)
                os << r.iterations;
            else
                os << format_number(v[i]);
        }
        os << '\n';
    }
}

/// Array of objects keyed by the CSV column names; non-finite numbers become null.
inline nlohmann::json to_json(const SweepTable& t) {
    const auto cols = table_columns(t.kind);
    auto arr = nlohmann::json::array();
    for (const auto& r : t.rows) {
        const auto v = detail::row_values(r, t.kind);
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i == 10)
                obj[cols[i]] = r.iterations;
            else if (std::isfinite(v[i]))
                obj[cols[i]] = v[i];
            else
                obj[cols[i]] = nullptr;
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline void write_json(std::ostream& os, const SweepTable& t) { os << to_json(t).dump(2) << '\n'; }

inline SweepTable parse_csv(std::string_view text) {
    SweepTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<std::string> header;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto fields = detail::split(line);
        if (header.empty()) {
            for (auto f : fields) header.emplace_back(f);
            if (header == table_columns(SweepKind::thermo))
                t.kind = SweepKind::thermo;
            else if (header == table_columns(SweepKind::tf_limit))
                t.kind = SweepKind::tf_limit;
            else
                throw table_error("unrecognized sweep header: " + std::string(line));
            continue;
        }
        if (fields.size() != header.size())
            throw table_error("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(fields.size()));
        std::vector<double> v;
        for (auto f : fields) v.push_back(detail::parse_number(f, line_no));
        t.rows.push_back(detail::row_from_values(v, t.kind));
    }
    if (header.empty()) throw table_error("empty sweep table");
    return t;
}

inline SweepTable parse_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw table_error(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_array() || doc.empty()) throw table_error("JSON sweep must be a non-empty array of rows");
    SweepTable t;
    t.kind = doc.front().contains("N") ? SweepKind::tf_limit : SweepKind::thermo;
    const auto cols = table_columns(t.kind);
    for (const auto& obj : doc) {
        if (!obj.is_object() || obj.size() != cols.size()) throw table_error("JSON row has the wrong keys");
        std::vector<double> v;
        for (const auto& c : cols) {
            if (!obj.contains(c)) throw table_error("JSON row lacks key '" + c + "'");
            const auto& x = obj[c];
            if (x.is_null())
                v.push_back(std::numeric_limits<double>::quiet_NaN());
            else if (x.is_number())
                v.push_back(x.get<double>());
            else
                throw table_error("JSON value for '" + c + "' is not a number");
        }
        t.rows.push_back(detail::row_from_values(v, t.kind));
    }
    return t;
}

inline SweepTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw table_error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') return parse_json(text);
    return parse_csv(text);
}

/// One "<control> <value>" file per column, named <column>.dat.
inline void write_plot_data(const std::filesystem::path& dir, const SweepTable& t) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw table_error("cannot create plot directory " + dir.string() + ": " + ec.message());
    const auto cols = table_columns(t.kind);
    for (std::size_t c = 1; c < cols.size(); ++c) {
        if (cols[c] == "iterations") continue;
        std::ofstream out(dir / (cols[c] + ".dat"), std::ios::binary);
        if (!out) throw table_error("cannot write into " + dir.string());
        out << "# " << cols[0] << ' ' << cols[c] << '\n';
        for (const auto& r : t.rows) {
            const auto v = detail::row_values(r, t.kind);
            out << format_number(v[0]) << ' ' << format_number(v[c]) << '\n';
        }
    }
}

} // namespace cqtf
