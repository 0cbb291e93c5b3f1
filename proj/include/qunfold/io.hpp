// Copyright 2026 The qunfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON and CSV serialization. Every JSON document carries "schema": "v1".
//
//   ResponseMatrix     {"n_qubits", "rows"}   rows[i][j] = Pr(measure i | true j)
//                      binned (non power-of-two) matrices use n_qubits = 0 and "n_bins"
//   ProbabilityVector  {"n_qubits", "values"}
//   CountVector        {"n_qubits", "values"} with integer values
//   CalibrationData    {"n_qubits", "shots_per_state", "histograms"} ordered by true state
//   NoiseModel         {"n_qubits", "p01", "p10"}

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qunfold/core.hpp"
#include "qunfold/noisefit.hpp"
#include "qunfold/response.hpp"
#include "qunfold/uncertainty.hpp"
#include "qunfold/unfold.hpp"

namespace qunfold::io {

using json = nlohmann::ordered_json;

inline constexpr const char *kSchema = "v1";

/// Shortest-safe lossless text for a double: 17 significant digits.
inline std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline json document() {
    json j;
    j["schema"] = kSchema;
    return j;
}

inline void check_schema(const json &j, const char *what) {
    require(j.is_object(), ErrorCode::InvalidArgument, std::string(what) + ": expected a JSON object");
    require(j.contains("schema") && j["schema"] == kSchema, ErrorCode::InvalidArgument,
            std::string(what) + ": missing or unsupported \"schema\" (expected \"v1\")");
}

template <typename T>
T field(const json &j, const char *key, const char *what) {
    require(j.contains(key), ErrorCode::InvalidArgument, std::string(what) + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + ": bad field \"" + key + "\": " + e.what());
    }
}

inline void check_qubits(const json &j, std::size_t length, const char *what) {
    if (!j.contains("n_qubits")) {
        return;
    }
    const int n = field<int>(j, "n_qubits", what);
    const int expected = qubits_for_dimension(length);
    require(n == expected || (n == 0 && expected < 0), ErrorCode::DimensionMismatch,
            std::string(what) + ": n_qubits = " + std::to_string(n) + " does not match length " +
                std::to_string(length));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_text(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::InvalidArgument, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    out << text;
    require(static_cast<bool>(out), ErrorCode::InvalidArgument, "write to '" + path + "' failed");
}

inline json parse(const std::string &text, const std::string &origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::InvalidArgument, origin + ": invalid JSON: " + e.what());
    }
}

inline json read_json(const std::string &path) { return parse(read_text(path), path); }

inline void write_json(const std::string &path, const json &j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Core types
// ---------------------------------------------------------------------------

inline json to_json(const ResponseMatrix &r) {
    auto j = detail::document();
    j["n_qubits"] = r.n_qubits();
    if (!r.is_qubit_space()) {
        j["n_bins"] = r.size();
    }
    j["rows"] = r.matrix().to_rows();
    return j;
}

/// Power-of-two matrices are validated as qubit responses; other sizes are
/// accepted as binned matrices only when `allow_binned` is set.
inline ResponseMatrix response_from_json(const json &j, bool allow_binned = true) {
    detail::check_schema(j, "response matrix");
    const auto rows = detail::field<std::vector<std::vector<double>>>(j, "rows", "response matrix");
    require(!rows.empty(), ErrorCode::NonSquare, "response matrix: no rows");
    for (const auto &row : rows) {
        require(row.size() == rows.size(), ErrorCode::NonSquare, "response matrix: not square");
    }
    detail::check_qubits(j, rows.size(), "response matrix");
    auto m = Matrix::from_rows(rows);
    if (allow_binned && !is_power_of_two(rows.size())) {
        return ResponseMatrix::binned(std::move(m));
    }
    auto r = ResponseMatrix::validate(std::move(m));
    require(r.n_qubits() <= kMaxQubits, ErrorCode::InvalidArgument,
            "response matrix: more than " + std::to_string(kMaxQubits) + " qubits");
    return r;
}

inline json to_json(const ProbabilityVector &v) {
    auto j = detail::document();
    j["n_qubits"] = std::max(v.n_qubits(), 0);
    j["values"] = v.values();
    return j;
}

inline json to_json(const CountVector &v) {
    auto j = detail::document();
    j["n_qubits"] = std::max(v.n_qubits(), 0);
    j["values"] = v.counts();
    return j;
}

/// Signed vectors (inversion estimates) share the vector layout.
inline json vector_to_json(const std::vector<double> &values) {
    auto j = detail::document();
    j["n_qubits"] = std::max(qubits_for_dimension(values.size()), 0);
    j["values"] = values;
    return j;
}

inline std::vector<double> values_from_json(const json &j, const char *what = "vector") {
    detail::check_schema(j, what);
    auto values = detail::field<std::vector<double>>(j, "values", what);
    require(!values.empty(), ErrorCode::InvalidArgument, std::string(what) + ": empty");
    detail::check_qubits(j, values.size(), what);
    return values;
}

inline ProbabilityVector probability_from_json(const json &j) {
    return ProbabilityVector(values_from_json(j, "probability vector"));
}

/// Accepts integral values only (1.0 is fine, 1.5 is not).
inline CountVector counts_from_json(const json &j) {
    const auto values = values_from_json(j, "count vector");
    std::vector<std::int64_t> counts;
    counts.reserve(values.size());
    for (double v : values) {
        require(std::isfinite(v) && v == std::floor(v), ErrorCode::InvalidArgument,
                "count vector: non-integer entry " + format_double(v));
        require(v >= 0.0, ErrorCode::NegativeEntry, "count vector: negative entry " + format_double(v));
        counts.push_back(static_cast<std::int64_t>(v));
    }
    return CountVector(std::move(counts));
}

inline json to_json(const CalibrationData &c) {
    auto j = detail::document();
    j["n_qubits"] = c.n_qubits();
    j["shots_per_state"] = c.shots_per_state();
    json hist = json::array();
    for (const auto &h : c.histograms()) {
        hist.push_back(h.counts());
    }
    j["histograms"] = std::move(hist);
    return j;
}

inline CalibrationData calibration_from_json(const json &j) {
    detail::check_schema(j, "calibration data");
    const int n = detail::field<int>(j, "n_qubits", "calibration data");
    const auto shots = detail::field<std::int64_t>(j, "shots_per_state", "calibration data");
    const auto raw = detail::field<std::vector<std::vector<std::int64_t>>>(j, "histograms", "calibration data");
    std::vector<CountVector> hist;
    hist.reserve(raw.size());
    for (const auto &h : raw) {
        hist.emplace_back(h);
    }
    return CalibrationData(n, shots, std::move(hist));
}

inline json to_json(const NoiseModel &nm) {
    auto j = detail::document();
    j["n_qubits"] = nm.n_qubits();
    j["p01"] = nm.p01();
    j["p10"] = nm.p10();
    return j;
}

inline NoiseModel noise_model_from_json(const json &j) {
    detail::check_schema(j, "noise model");
    auto p01 = detail::field<std::vector<double>>(j, "p01", "noise model");
    auto p10 = detail::field<std::vector<double>>(j, "p10", "noise model");
    if (j.contains("n_qubits")) {
        const auto n = detail::field<std::size_t>(j, "n_qubits", "noise model");
        require(p01.size() == n && p10.size() == n, ErrorCode::DimensionMismatch,
                "noise model: rate lists do not match n_qubits");
    }
    return NoiseModel(std::move(p01), std::move(p10));
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

inline json to_json(const UnfoldResult &r) {
    auto j = vector_to_json(r.estimate);
    j["method"] = to_string(r.method);
    j["iterations_used"] = r.iterations_used;
    j["residual_norm"] = r.residual_norm;
    j["converged"] = r.converged;
    return j;
}

inline json to_json(const UncertaintyComponents &c) {
    json j;
    j["stat_m"] = c.stat_m;
    j["stat_R"] = c.stat_r;
    j["nonclosure"] = c.nonclosure;
    j["systematic_R"] = c.systematic_r;
    return j;
}

inline json to_json(const UncertaintyReport &r) {
    auto j = detail::document();
    j["iterations"] = r.iterations;
    json states = json::array();
    for (const auto &c : r.per_state) {
        states.push_back(to_json(c));
    }
    j["per_state"] = std::move(states);
    j["averaged"] = to_json(r.averaged);
    j["total"] = r.total;
    return j;
}

inline json fit_to_json(const FitResult &f) {
    json j;
    if (f.p01.size() == 1) {
        j["p01"] = f.p01[0];
        j["p10"] = f.p10[0];
    } else {
        j["p01"] = f.p01;
        j["p10"] = f.p10;
    }
    j["objective"] = f.objective;
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    return j;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char *kScanHeader = "N,stat_m,stat_R,nonclosure,systematic_R,total,bias,mse\n";

/// One row per N; bias and mse are "nan" when no truth was supplied.
inline std::string scan_csv(const ScanTable &table) {
    std::string out = kScanHeader;
    for (const auto &row : table.rows) {
        const double nan = std::nan("");
        const auto &a = row.report ? row.report->averaged : UncertaintyComponents{nan, nan, nan, nan};
        const double total = row.report ? row.report->total : nan;
        const double bias = row.truth_comparison ? row.truth_comparison->bias : nan;
        const double mse = row.truth_comparison ? row.truth_comparison->mse : nan;
        out += std::to_string(row.iterations);
        for (double v : {a.stat_m, a.stat_r, a.nonclosure, a.systematic_r, total, bias, mse}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace qunfold::io
