#pragma once

// RepresentationDocument: the JSON exchange format for (L, x, R, C).
//
//   {"n": 2, "p": 2,
//    "L": [[0, 0], [0, 0]], "R": [[0, 0], [1, 0]],
//    "C": [[1, 0], [0, 1]], "x": [1, 0]}
//
// Keys are exactly n, p, L, R, C and x; matrices are arrays of row arrays.

#include <cmath>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "realtree/decoder.hpp"
#include "realtree/error.hpp"
#include "realtree/tree.hpp"

namespace realtree {

namespace detail {

inline Eigen::Index read_dimension(const nlohmann::json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw SchemaError(std::string("document: \"") + key + "\" must be a positive integer");
    }
    return static_cast<Eigen::Index>(v.get<long long>());
}

inline double read_real(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) {
        throw SchemaError("document: " + where + " must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw SchemaError("document: " + where + " is not finite");
    }
    return d;
}

inline Matrix read_matrix(const nlohmann::json& doc, const char* key, Eigen::Index rows, Eigen::Index cols) {
    const auto& v = doc.at(key);
    const std::string name = std::string("\"") + key + "\"";
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
        throw SchemaError("document: " + name + " must be an array of " + std::to_string(rows) + " rows");
    }
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw SchemaError("document: row " + std::to_string(i) + " of " + name + " must have " +
                              std::to_string(cols) + " entries");
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            a(i, j) = read_real(row[static_cast<std::size_t>(j)],
                                name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
        }
    }
    return a;
}

inline void write_row(std::string& out, const double* data, Eigen::Index count, Eigen::Index stride) {
    out.push_back('[');
    for (Eigen::Index j = 0; j < count; ++j) {
        if (j > 0) {
            out += ", ";
        }
        out += format_real(data[j * stride]);
    }
    out.push_back(']');
}

inline void write_matrix(std::string& out, const char* key, const Matrix& a) {
    out += "  \"";
    out += key;
    out += "\": [";
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        write_row(out, a.data() + i, a.cols(), a.rows());
    }
    out += "]";
}

}  // namespace detail

inline Representation representation_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("document: top level must be an object");
    }
    static const std::set<std::string> keys{"n", "p", "L", "R", "C", "x"};
    for (const auto& [k, _] : doc.items()) {
        if (keys.count(k) == 0) {
            throw SchemaError("document: unexpected key \"" + k + "\"");
        }
    }
    for (const auto& k : keys) {
        if (!doc.contains(k)) {
            throw SchemaError("document: missing key \"" + k + "\"");
        }
    }
    const Eigen::Index n = detail::read_dimension(doc, "n");
    const Eigen::Index p = detail::read_dimension(doc, "p");
    Representation rep;
    rep.L = detail::read_matrix(doc, "L", n, n);
    rep.R = detail::read_matrix(doc, "R", n, n);
    rep.C = detail::read_matrix(doc, "C", p, n);
    const auto& x = doc.at("x");
    if (!x.is_array() || static_cast<Eigen::Index>(x.size()) != n) {
        throw SchemaError("document: \"x\" must be an array of " + std::to_string(n) + " numbers");
    }
    rep.x.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rep.x(i) = detail::read_real(x[static_cast<std::size_t>(i)], "\"x\"[" + std::to_string(i) + "]");
    }
    return rep;
}

inline Representation parse_representation(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("document: ") + e.what(), e.byte);
    } catch (const nlohmann::json::out_of_range& e) {
        // Literals such as 1e999 overflow during parsing.
        throw SchemaError(std::string("document: ") + e.what());
    }
    return representation_from_json(doc);
}

/// Document text with shortest round-trip numbers, one key per line.
inline std::string format_representation(const Representation& rep) {
    rep.validate();
    std::string out = "{\n";
    out += "  \"n\": " + std::to_string(rep.n()) + ",\n";
    out += "  \"p\": " + std::to_string(rep.p()) + ",\n";
    detail::write_matrix(out, "L", rep.L);
    out += ",\n";
    detail::write_matrix(out, "R", rep.R);
    out += ",\n";
    detail::write_matrix(out, "C", rep.C);
    out += ",\n  \"x\": ";
    detail::write_row(out, rep.x.data(), rep.x.size(), 1);
    out += "\n}\n";
    return out;
}

}  // namespace realtree
