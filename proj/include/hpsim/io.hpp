#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpsim/decompose.hpp"
#include "hpsim/maps.hpp"

namespace hpsim {

using json = nlohmann::json;

// --- matrices: nested arrays of [re, im] pairs ---

inline json to_json(const CMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) {
            const cplx& v = m.at(i, j);
            row.push_back(json::array({v.real(), v.imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw InvalidSpec("matrix: expected a non-empty array of rows");
    int rows = static_cast<int>(j.size());
    if (!j[0].is_array() || j[0].empty())
        throw InvalidSpec("matrix: expected non-empty rows");
    int cols = static_cast<int>(j[0].size());
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
            throw InvalidSpec("matrix: ragged rows");
        for (int c = 0; c < cols; ++c) {
            const json& e = j[i][c];
            if (e.is_number()) {
                m.at(i, c) = cplx(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2) {
                m.at(i, c) = cplx(e[0].get<double>(), e[1].get<double>());
            } else {
                throw InvalidSpec("matrix: entries must be numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

// --- maps ---

inline json to_json(const MapRep& e) {
    return json{{"dim_in", e.dim_in}, {"dim_out", e.dim_out}, {"choi", to_json(e.choi)}};
}

inline MapRep map_from_json(const json& j) {
    if (!j.contains("dim_in") || !j.contains("dim_out") || !j.contains("choi"))
        throw InvalidSpec("map: expected keys dim_in, dim_out, choi");
    MapRep e;
    e.dim_in = j.at("dim_in").get<int>();
    e.dim_out = j.at("dim_out").get<int>();
    if (e.dim_in < 1 || e.dim_out < 1) throw InvalidSpec("map: dimensions must be positive");
    e.choi = matrix_from_json(j.at("choi"));
    int n = e.dim_in * e.dim_out;
    if (e.choi.rows != n || e.choi.cols != n)
        throw InvalidSpec("map: Choi matrix must be dim_in*dim_out square");
    return e;
}

// --- entry-extraction specs ---

inline json to_json(const ExtractionSpec& s) {
    json pairs = json::array();
    for (const auto& [a, b] : s.pairs) pairs.push_back(json::array({a, b}));
    return json{{"d", s.d}, {"indices", s.indices}, {"pairs", std::move(pairs)}};
}

inline ExtractionSpec spec_from_json(const json& j) {
    if (!j.contains("d") || !j.contains("indices") || !j.contains("pairs"))
        throw InvalidSpec("extraction spec: expected keys d, indices, pairs");
    ExtractionSpec s;
    s.d = j.at("d").get<int>();
    s.indices = j.at("indices").get<std::vector<int>>();
    for (const auto& p : j.at("pairs")) {
        if (!p.is_array() || p.size() != 2)
            throw InvalidSpec("extraction spec: pairs must be [j, k] arrays");
        s.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
    validate(s);
    return s;
}

// --- decompositions ---

inline json to_json(const KrausSet& k) {
    json ops = json::array();
    for (const auto& op : k.kraus) ops.push_back(to_json(op));
    return ops;
}

inline KrausSet kraus_from_json(const json& j, int dim_in, int dim_out) {
    KrausSet k;
    k.dim_in = dim_in;
    k.dim_out = dim_out;
    for (const auto& op : j) {
        CMatrix m = matrix_from_json(op);
        if (m.rows != dim_out || m.cols != dim_in)
            throw InvalidSpec("kraus operator has wrong shape");
        k.kraus.push_back(std::move(m));
    }
    if (k.kraus.empty()) throw InvalidSpec("kraus set must be non-empty");
    return k;
}

inline json to_json(const TwistedChannel& t) {
    json branches = json::array();
    for (const auto& b : t.branches)
        branches.push_back(json{{"sign", b.sign}, {"kraus", to_json(b.kraus)}});
    return json{{"dim_in", t.dim_in},
                {"dim_out", t.dim_out},
                {"scale", t.scale},
                {"branches", std::move(branches)}};
}

inline TwistedChannel twisted_from_json(const json& j) {
    TwistedChannel t;
    t.dim_in = j.at("dim_in").get<int>();
    t.dim_out = j.at("dim_out").get<int>();
    t.scale = j.at("scale").get<double>();
    for (const auto& b : j.at("branches")) {
        TwistedBranch br;
        br.sign = b.at("sign").get<int>();
        if (std::abs(std::abs(br.sign) - 1.0) > 1e-12)
            throw InvalidSpec("twisted channel: signs must be +1 or -1");
        br.kraus = kraus_from_json(b.at("kraus"), t.dim_in, t.dim_out);
        t.branches.push_back(std::move(br));
    }
    if (t.branches.empty()) throw InvalidSpec("twisted channel must have branches");
    return t;
}

inline json to_json(const QpdDecomposition& d) {
    json terms = json::array();
    for (const auto& t : d.terms)
        terms.push_back(json{{"alpha", t.alpha}, {"kraus", to_json(t.kraus)}});
    return json{{"dim_in", d.dim_in}, {"dim_out", d.dim_out}, {"terms", std::move(terms)}};
}

inline QpdDecomposition qpd_from_json(const json& j) {
    QpdDecomposition d;
    d.dim_in = j.at("dim_in").get<int>();
    d.dim_out = j.at("dim_out").get<int>();
    for (const auto& t : j.at("terms")) {
        QpdTerm term;
        term.alpha = t.at("alpha").get<double>();
        term.kraus = kraus_from_json(t.at("kraus"), d.dim_in, d.dim_out);
        d.terms.push_back(std::move(term));
    }
    if (d.terms.empty()) throw InvalidSpec("quasi-probability decomposition must have terms");
    return d;
}

// --- files ---

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InvalidSpec("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

/// Write via a temporary and rename, so a failed run never leaves a
/// truncated output file behind.
inline void write_text_file(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot open file for writing: " + tmp);
        out << content;
        if (!out.good()) throw Error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot rename " + tmp + " to " + path);
}

inline void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// --- CSV ---

inline std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += fields[i];
    }
    line += '\n';
    return line;
}

}  // namespace hpsim
