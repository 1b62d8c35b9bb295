#pragma once

// File formats: trajectory / state CSV, and JSON for matrices, behaviors,
// models, membership certificates and PE reports.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcones/behavior.hpp"
#include "bcones/errors.hpp"
#include "bcones/nnrank.hpp"
#include "bcones/pecheck.hpp"
#include "bcones/statespace.hpp"

namespace bcones::io {

using json = nlohmann::json;

/// 17 significant digits, enough for a lossless round trip of a double.
inline std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

namespace detail {

inline std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& cell, std::size_t line)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw InputError("line " + std::to_string(line) + ": not a number: '" + cell + "'");
    }
}

} // namespace detail

/// Parses comma-separated values with one header row. Blank lines are skipped.
inline CsvTable read_csv(std::istream& in)
{
    CsvTable table;
    std::string line;
    std::size_t lineNo = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineNo;
        if (lineNo == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw InputError("line " + std::to_string(lineNo) + ": expected " +
                             std::to_string(table.header.size()) + " fields, got " +
                             std::to_string(cells.size()));
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(detail::parse_double(c, lineNo));
        rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw InputError("CSV has no header row");
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return table;
}

/// Header `u1,...,um,y1,...,yp`; inputs must precede outputs.
inline Trajectory read_trajectory_csv(std::istream& in)
{
    const CsvTable t = read_csv(in);
    std::size_t m = 0;
    bool seenOutput = false;
    for (const auto& name : t.header) {
        if (name.empty() || (name[0] != 'u' && name[0] != 'y'))
            throw InputError("trajectory header fields must be named u<k> or y<k>, got '" + name + "'");
        if (name[0] == 'u') {
            if (seenOutput) throw InputError("trajectory inputs must precede outputs");
            ++m;
        } else {
            seenOutput = true;
        }
    }
    if (t.values.rows() == 0) throw InputError("trajectory CSV has no samples");
    return Trajectory(t.values, m);
}

/// Header `x1,...,xn`.
inline StateTrajectory read_state_csv(std::istream& in)
{
    const CsvTable t = read_csv(in);
    for (const auto& name : t.header)
        if (name.empty() || name[0] != 'x')
            throw InputError("state header fields must be named x<k>, got '" + name + "'");
    if (t.values.rows() == 0) throw InputError("state CSV has no samples");
    return StateTrajectory(t.values);
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values)
{
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_number(values(i, j));
        out << '\n';
    }
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& w)
{
    std::vector<std::string> header;
    for (std::size_t k = 1; k <= w.m(); ++k) header.push_back("u" + std::to_string(k));
    for (std::size_t k = 1; k <= w.p(); ++k) header.push_back("y" + std::to_string(k));
    write_csv(out, header, w.samples());
}

inline void write_state_csv(std::ostream& out, const StateTrajectory& x)
{
    std::vector<std::string> header;
    for (std::size_t k = 1; k <= x.n(); ++k) header.push_back("x" + std::to_string(k));
    write_csv(out, header, x.samples());
}

inline json matrix_to_json(const Matrix& M)
{
    json rows = json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Reads a row-major array of arrays. When `rows`/`cols` are given (>= 0) the
/// shape is enforced; `[]` is accepted for any shape with a zero extent, and
/// a flat array for a single column.
inline Matrix matrix_from_json(const json& j, Index rows = -1, Index cols = -1, const char* what = "matrix")
{
    const std::string name(what);
    if (!j.is_array()) throw InputError(name + " must be an array");
    if (j.empty()) {
        const Index r = rows >= 0 ? rows : 0;
        const Index c = cols >= 0 ? cols : 0;
        if (r != 0 && c != 0) throw InputError(name + " is empty but expected " + std::to_string(r) + "x" +
                                               std::to_string(c));
        return Matrix(r, c);
    }
    const bool flat = !j.front().is_array();
    Matrix M;
    if (flat) {
        M.resize(static_cast<Index>(j.size()), 1);
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) throw InputError(name + " entries must be numbers");
            M(static_cast<Index>(i), 0) = j[i].get<double>();
        }
    } else {
        const std::size_t c = j.front().size();
        M.resize(static_cast<Index>(j.size()), static_cast<Index>(c));
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_array() || j[i].size() != c) throw InputError(name + " rows must have equal length");
            for (std::size_t k = 0; k < c; ++k) {
                if (!j[i][k].is_number()) throw InputError(name + " entries must be numbers");
                M(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
            }
        }
    }
    if (rows >= 0 && cols >= 0 && flat && rows == 1 && M.rows() == cols) M.transposeInPlace();
    if ((rows >= 0 && M.rows() != rows) || (cols >= 0 && M.cols() != cols))
        throw InputError(name + " has shape " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()) +
                         ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    return M;
}

inline json hankel_to_json(const HankelMatrix& H)
{
    return json{{"rows", H.entries.rows()}, {"cols", H.entries.cols()}, {"entries", matrix_to_json(H.entries)}};
}

inline json behavior_to_json(const FiniteBehavior& B)
{
    return json{{"L", B.horizon()},
                {"q", B.q()},
                {"hull", std::string(to_string(B.hull()))},
                {"generators", matrix_to_json(B.generators())}};
}

inline FiniteBehavior behavior_from_json(const json& j)
{
    try {
        const auto L = j.at("L").get<std::size_t>();
        const auto q = j.at("q").get<std::size_t>();
        const HullType hull = parse_hull(j.at("hull").get<std::string>());
        Matrix G = matrix_from_json(j.at("generators"), static_cast<Index>(L * q), -1, "generators");
        return FiniteBehavior(L, q, std::move(G), hull);
    } catch (const json::exception& e) {
        throw InputError(std::string("behavior JSON: ") + e.what());
    }
}

inline json model_to_json(const StateSpaceModel& ss)
{
    json j{{"n", ss.n()},
           {"m", ss.m()},
           {"p", ss.p()},
           {"affine", ss.affine()},
           {"A", matrix_to_json(ss.A())},
           {"B", matrix_to_json(ss.B())},
           {"C", matrix_to_json(ss.C())},
           {"D", matrix_to_json(ss.D())}};
    if (ss.affine()) {
        j["E"] = matrix_to_json(ss.E());
        j["F"] = matrix_to_json(ss.F());
    }
    return j;
}

inline StateSpaceModel model_from_json(const json& j)
{
    try {
        const auto n = static_cast<Index>(j.at("n").get<std::size_t>());
        const auto m = static_cast<Index>(j.at("m").get<std::size_t>());
        const auto p = static_cast<Index>(j.at("p").get<std::size_t>());
        const bool affine = j.value("affine", false);
        auto get = [&](const char* key, Index r, Index c) {
            if (!j.contains(key)) {
                if (r == 0 || c == 0) return Matrix(r, c);
                throw InputError(std::string("model JSON: missing ") + key);
            }
            return matrix_from_json(j.at(key), r, c, key);
        };
        Matrix A = get("A", n, n);
        Matrix B = get("B", n, m);
        Matrix C = get("C", p, n);
        Matrix D = j.contains("D") ? get("D", p, m) : Matrix(Matrix::Zero(p, m));
        if (!affine) return StateSpaceModel(std::move(A), std::move(B), std::move(C), std::move(D));
        Vector E = j.contains("E") ? Vector(get("E", n, 1)) : Vector(Vector::Zero(n));
        Vector F = j.contains("F") ? Vector(get("F", p, 1)) : Vector(Vector::Zero(p));
        return StateSpaceModel(std::move(A), std::move(B), std::move(C), std::move(D), std::move(E), std::move(F));
    } catch (const json::exception& e) {
        throw InputError(std::string("model JSON: ") + e.what());
    }
}

inline json certificate_to_json(const MembershipCertificate& c)
{
    json j{{"feasible", c.feasible}, {"residualNorm", c.residualNorm}, {"tolUsed", c.tolUsed}};
    if (c.coefficients) j["coefficients"] = std::vector<double>(c.coefficients->begin(), c.coefficients->end());
    else j["coefficients"] = nullptr;
    return j;
}

/// PEReport: class, L, m, n, requiredRank, ordinaryRank, nnLower, nnUpper,
/// monomialFound, verdict, and `representation` when one was certified.
inline json report_to_json(const PEReport& r, bool embedRepresentation = true)
{
    json j{{"class", std::string(to_string(r.modelClass))},
           {"L", r.L},
           {"m", r.m},
           {"n", r.n},
           {"requiredRank", r.requiredRank},
           {"ordinaryRank", r.ordinaryRank},
           {"nnLower", nullptr},
           {"nnUpper", nullptr},
           {"monomialFound", nullptr},
           {"verdict", std::string(to_string(r.verdict))}};
    if (r.nnBounds) {
        j["nnLower"] = r.nnBounds->lower;
        j["nnLowerMethod"] = to_string(r.nnBounds->lowerMethod);
        if (r.nnBounds->upper) j["nnUpper"] = *r.nnBounds->upper;
    }
    if (r.monomialStatus != MonomialStatus::notChecked) j["monomialFound"] = r.monomialStatus == MonomialStatus::found;
    if (r.monomial) {
        j["monomialRows"] = r.monomial->rowIndices;
        j["monomialCols"] = r.monomial->colIndices;
    }
    if (embedRepresentation && r.representation) j["representation"] = behavior_to_json(*r.representation);
    return j;
}

} // namespace bcones::io
