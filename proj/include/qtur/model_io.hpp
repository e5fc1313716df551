// Copyright 2026 The qtur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * JSON model files.
 *
 *     {
 *       "dim": 2,
 *       "H": [[[0, 0], [0.5, 0]], [[0.5, 0], [1, 0]]],
 *       "jumps": [{"L": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]], "nu": 1.0}],
 *       "F": ...,
 *       "Y": ..., "lambda": 1.0,
 *       "rho0": ...
 *     }
 *
 * Matrices are row-major, either as a list of rows or as one flat list of
 * dim^2 entries. An entry is a [re, im] pair or a plain real number. F
 * defaults to zero, jumps to none; Y and lambda are only read for homodyne
 * models and rho0 is optional.
 */

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "qtur/error.hpp"
#include "qtur/master_equation.hpp"
#include "qtur/operator_algebra.hpp"

namespace qtur {

namespace detail {

[[nodiscard]] inline Complex parse_entry(const nlohmann::json &e, const std::string &what) {
    if (e.is_number()) {
        return {e.get<double>(), 0.0};
    }
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        return {e[0].get<double>(), e[1].get<double>()};
    }
    throw ModelError("model file: entry of " + what + " must be a number or [re, im]");
}

[[nodiscard]] inline Operator parse_matrix(const nlohmann::json &j, Eigen::Index dim,
                                           const std::string &what) {
    if (!j.is_array()) {
        throw ModelError("model file: " + what + " must be an array");
    }
    Operator m(dim, dim);
    const auto n = static_cast<std::size_t>(dim);
    auto is_entry = [](const nlohmann::json &e) {
        return e.is_number() ||
               (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number());
    };
    if (j.size() == n * n && std::all_of(j.begin(), j.end(), is_entry)) {
        // flat row-major list
        for (std::size_t k = 0; k < n * n; ++k) {
            m(static_cast<Eigen::Index>(k / n), static_cast<Eigen::Index>(k % n)) =
                parse_entry(j[k], what);
        }
        return m;
    }
    if (j.size() != n) {
        throw ModelError("model file: " + what + " must have " + std::to_string(n) +
                         " rows");
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (!j[r].is_array() || j[r].size() != n) {
            throw ModelError("model file: row " + std::to_string(r) + " of " + what +
                             " must have " + std::to_string(n) + " entries");
        }
        for (std::size_t c = 0; c < n; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_entry(j[r][c], what);
        }
    }
    return m;
}

[[nodiscard]] inline Eigen::Index parse_dim(const nlohmann::json &j) {
    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long>() < 1) {
        throw ModelError("model file: 'dim' must be a positive integer");
    }
    return j["dim"].get<Eigen::Index>();
}

[[nodiscard]] inline Operator matrix_or_zero(const nlohmann::json &j, const char *key,
                                             Eigen::Index dim) {
    return j.contains(key) ? parse_matrix(j[key], dim, key) : Operator::Zero(dim, dim);
}

} // namespace detail

[[nodiscard]] inline nlohmann::json matrix_to_json(const Operator &m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

[[nodiscard]] inline JumpModelSpec jump_model_from_json(const nlohmann::json &j) {
    const Eigen::Index dim = detail::parse_dim(j);
    JumpModelSpec m;
    if (!j.contains("H")) {
        throw ModelError("model file: missing 'H'");
    }
    m.H = detail::parse_matrix(j["H"], dim, "H");
    m.F = detail::matrix_or_zero(j, "F", dim);
    if (j.contains("jumps")) {
        if (!j["jumps"].is_array()) {
            throw ModelError("model file: 'jumps' must be an array");
        }
        for (const auto &ch : j["jumps"]) {
            if (!ch.contains("L")) {
                throw ModelError("model file: jump channel without 'L'");
            }
            m.jumps.push_back(
                {detail::parse_matrix(ch["L"], dim, "L"), ch.value("nu", 0.0)});
        }
    }
    validate(m);
    return m;
}

[[nodiscard]] inline HomodyneModelSpec homodyne_model_from_json(const nlohmann::json &j) {
    const Eigen::Index dim = detail::parse_dim(j);
    HomodyneModelSpec m;
    if (!j.contains("H") || !j.contains("Y")) {
        throw ModelError("model file: homodyne model needs 'H' and 'Y'");
    }
    m.H = detail::parse_matrix(j["H"], dim, "H");
    m.Y = detail::parse_matrix(j["Y"], dim, "Y");
    m.F = detail::matrix_or_zero(j, "F", dim);
    m.lambda = j.value("lambda", 1.0);
    validate(m);
    return m;
}

[[nodiscard]] inline std::optional<Operator> initial_state_from_json(const nlohmann::json &j) {
    if (!j.contains("rho0")) {
        return std::nullopt;
    }
    Operator rho = detail::parse_matrix(j["rho0"], detail::parse_dim(j), "rho0");
    check_density(rho, "model file: rho0");
    return rho;
}

[[nodiscard]] inline nlohmann::json to_json(const JumpModelSpec &m) {
    nlohmann::json j;
    j["dim"] = m.dim();
    j["H"] = matrix_to_json(m.H);
    j["jumps"] = nlohmann::json::array();
    for (const auto &ch : m.jumps) {
        j["jumps"].push_back({{"L", matrix_to_json(ch.L)}, {"nu", ch.nu}});
    }
    j["F"] = matrix_to_json(m.F);
    return j;
}

[[nodiscard]] inline nlohmann::json to_json(const HomodyneModelSpec &m) {
    nlohmann::json j;
    j["dim"] = m.dim();
    j["H"] = matrix_to_json(m.H);
    j["Y"] = matrix_to_json(m.Y);
    j["F"] = matrix_to_json(m.F);
    j["lambda"] = m.lambda;
    return j;
}

/// Reads and parses a JSON document; the error message names the path.
[[nodiscard]] inline nlohmann::json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open model file '" + path.string() + "'");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw ModelError("model file '" + path.string() + "': " + e.what());
    }
}

} // namespace qtur
