// Copyright 2026 The NoiseForge Authors
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

// JSON and CSV interchange. Parsing rides on nlohmann::json for positioned
// error messages; emission uses a small fixed-order writer so outputs are
// byte-stable across runs and platforms. Numbers are written with 17
// significant digits (lossless double round-trip), always with '.' as the
// decimal separator.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "noiseforge/designer.hpp"
#include "noiseforge/errors.hpp"
#include "noiseforge/matrix.hpp"
#include "noiseforge/mechanisms.hpp"
#include "noiseforge/metrics.hpp"
#include "noiseforge/sim.hpp"

namespace noiseforge {

namespace serialize_detail {

inline std::string fmt17(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string json_number(double v) {
  if (!std::isfinite(v))
    throw SerializationError("JSON output cannot represent a non-finite number");
  return fmt17(v);
}

inline std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

inline std::string json_vec(const Vec& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += json_number(v[i]);
  }
  out += ']';
  return out;
}

inline std::string json_rows(const RectMatrix& A) {
  std::string out = "[";
  for (int i = 0; i < A.rows(); ++i) {
    if (i) out += ',';
    out += '[';
    for (int j = 0; j < A.cols(); ++j) {
      if (j) out += ',';
      out += json_number(A(i, j));
    }
    out += ']';
  }
  out += ']';
  return out;
}

inline std::string json_rows(const SymMatrix& A) { return json_rows(A.as_rect()); }

// ---- parsing helpers -------------------------------------------------------

inline const nlohmann::json& require_key(const nlohmann::json& j,
                                          const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw SerializationError(std::string(where) + ": missing field \"" + key +
                             "\"");
  return *it;
}

inline void reject_unknown(const nlohmann::json& j,
                           const std::vector<std::string>& known,
                           const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw SerializationError(std::string(where) + ": unknown field \"" +
                               it.key() + "\"");
}

inline double parse_number(const nlohmann::json& j, const char* where) {
  if (!j.is_number())
    throw SerializationError(std::string(where) + ": expected a number");
  return j.get<double>();
}

inline long parse_integer(const nlohmann::json& j, const char* where) {
  if (!j.is_number_integer())
    throw SerializationError(std::string(where) + ": expected an integer");
  return j.get<long>();
}

inline bool parse_bool(const nlohmann::json& j, const char* where) {
  if (!j.is_boolean())
    throw SerializationError(std::string(where) + ": expected a boolean");
  return j.get<bool>();
}

inline std::string parse_string(const nlohmann::json& j, const char* where) {
  if (!j.is_string())
    throw SerializationError(std::string(where) + ": expected a string");
  return j.get<std::string>();
}

inline Vec parse_vec(const nlohmann::json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw SerializationError(std::string(where) +
                             ": expected a nonempty array of numbers");
  Vec v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(parse_number(e, where));
  return v;
}

inline RectMatrix parse_matrix(const nlohmann::json& j, const char* where) {
  if (!j.is_array() || j.empty())
    throw SerializationError(std::string(where) +
                             ": expected a nonempty array of rows");
  int rows = static_cast<int>(j.size());
  Vec first = parse_vec(j[0], where);
  int cols = static_cast<int>(first.size());
  Vec entries;
  entries.reserve(static_cast<std::size_t>(rows) * cols);
  entries.insert(entries.end(), first.begin(), first.end());
  for (int i = 1; i < rows; ++i) {
    Vec row = parse_vec(j[i], where);
    if (static_cast<int>(row.size()) != cols)
      throw SerializationError(std::string(where) + ": ragged rows (row " +
                               std::to_string(i) + " has " +
                               std::to_string(row.size()) + " entries, not " +
                               std::to_string(cols) + ")");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return RectMatrix(rows, cols, std::move(entries));
}

inline SymMatrix parse_sym(const nlohmann::json& j, const char* where) {
  RectMatrix A = parse_matrix(j, where);
  if (A.rows() != A.cols())
    throw SerializationError(std::string(where) + ": matrix must be square");
  for (int i = 0; i < A.rows(); ++i)
    for (int k = i + 1; k < A.cols(); ++k) {
      double tol =
          1e-12 * std::max({1.0, std::abs(A(i, k)), std::abs(A(k, i))});
      if (std::abs(A(i, k) - A(k, i)) > tol)
        throw SerializationError(std::string(where) +
                                 ": matrix must be symmetric");
    }
  Vec entries;
  entries.reserve(static_cast<std::size_t>(A.rows()) * A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = 0; k < A.cols(); ++k) entries.push_back(A(i, k));
  return SymMatrix(A.rows(), std::move(entries));
}

inline nlohmann::json parse_document(const std::string& text, const char* where) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.what() carries the byte position of the failure.
    throw SerializationError(std::string(where) + ": " + e.what());
  }
}

}  // namespace serialize_detail

// ---- mechanisms -------------------------------------------------------------

inline std::string to_json(const NoiseMechanism& mech) {
  using namespace serialize_detail;
  if (const auto* g = std::get_if<GaussianMechanism>(&mech))
    return "{\"kind\":\"gaussian\",\"covariance\":" + json_rows(g->covariance()) +
           "}";
  if (const auto* l = std::get_if<LaplaceMechanism>(&mech))
    return "{\"kind\":\"laplace\",\"scale\":" + json_number(l->scale()) + "}";
  throw UnsupportedMethodError(
      "to_json: generic mechanisms carry callbacks and have no JSON form");
}

inline NoiseMechanism mechanism_from_json(const nlohmann::json& j) {
  using namespace serialize_detail;
  if (!j.is_object())
    throw SerializationError("mechanism: expected a JSON object");
  std::string kind = parse_string(require_key(j, "kind", "mechanism"),
                                  "mechanism.kind");
  if (kind == "gaussian") {
    reject_unknown(j, {"kind", "covariance"}, "mechanism");
    return GaussianMechanism(
        parse_sym(require_key(j, "covariance", "mechanism"),
                  "mechanism.covariance"));
  }
  if (kind == "laplace") {
    reject_unknown(j, {"kind", "scale"}, "mechanism");
    return LaplaceMechanism(
        parse_number(require_key(j, "scale", "mechanism"), "mechanism.scale"));
  }
  throw SerializationError("mechanism: unknown kind \"" + kind +
                           "\" (expected \"gaussian\" or \"laplace\")");
}

inline NoiseMechanism mechanism_from_json(const std::string& text) {
  return mechanism_from_json(
      serialize_detail::parse_document(text, "mechanism"));
}

// ---- measures ---------------------------------------------------------------

inline std::string to_json(const MeasureTriple& t) {
  using namespace serialize_detail;
  return "{\"privacy\":" + json_number(t.privacy) +
         ",\"quality\":" + json_number(t.quality) +
         ",\"security\":" + json_number(t.security) + "}";
}

inline MeasureTriple measures_from_json(const nlohmann::json& j) {
  using namespace serialize_detail;
  if (!j.is_object())
    throw SerializationError("measures: expected a JSON object");
  reject_unknown(j, {"privacy", "quality", "security"}, "measures");
  return MeasureTriple{
      parse_number(require_key(j, "privacy", "measures"), "measures.privacy"),
      parse_number(require_key(j, "quality", "measures"), "measures.quality"),
      parse_number(require_key(j, "security", "measures"), "measures.security")};
}

inline MeasureTriple measures_from_json(const std::string& text) {
  return measures_from_json(serialize_detail::parse_document(text, "measures"));
}

// ---- problem spec -----------------------------------------------------------

inline std::string to_json(const ProblemSpec& spec) {
  using namespace serialize_detail;
  std::string out = "{\"C\":" + json_rows(spec.C) + ",\"F\":" +
                    json_rows(spec.F) + ",\"W\":" + json_rows(spec.W) +
                    ",\"eta\":" + json_number(spec.eta) +
                    ",\"alpha\":" + json_number(spec.alpha);
  if (spec.domain_box) {
    out += ",\"domain_box\":{\"lower\":" + json_vec(spec.domain_box->lower) +
           ",\"upper\":" + json_vec(spec.domain_box->upper) + "}";
  }
  out += '}';
  return out;
}

/** F may be omitted and defaults to the m x m identity (every channel open). */
inline ProblemSpec problem_spec_from_json(const nlohmann::json& j) {
  using namespace serialize_detail;
  if (!j.is_object())
    throw SerializationError("spec: expected a JSON object");
  reject_unknown(j, {"C", "F", "W", "eta", "alpha", "domain_box"}, "spec");
  RectMatrix C = parse_matrix(require_key(j, "C", "spec"), "spec.C");
  SymMatrix W = parse_sym(require_key(j, "W", "spec"), "spec.W");
  RectMatrix F = j.contains("F") ? parse_matrix(j["F"], "spec.F")
                                 : RectMatrix::identity(C.rows());
  double eta = parse_number(require_key(j, "eta", "spec"), "spec.eta");
  double alpha = parse_number(require_key(j, "alpha", "spec"), "spec.alpha");
  std::optional<DomainBox> box;
  if (j.contains("domain_box")) {
    const auto& jb = j["domain_box"];
    if (!jb.is_object())
      throw SerializationError("spec.domain_box: expected a JSON object");
    reject_unknown(jb, {"lower", "upper"}, "spec.domain_box");
    box = DomainBox{
        parse_vec(require_key(jb, "lower", "spec.domain_box"),
                  "spec.domain_box.lower"),
        parse_vec(require_key(jb, "upper", "spec.domain_box"),
                  "spec.domain_box.upper")};
  }
  return ProblemSpec{std::move(C), std::move(F), std::move(W), eta, alpha,
                     std::move(box)};
}

inline ProblemSpec problem_spec_from_json(const std::string& text) {
  return problem_spec_from_json(serialize_detail::parse_document(text, "spec"));
}

// ---- design result ----------------------------------------------------------

inline std::string to_json(const DesignResult& r) {
  using namespace serialize_detail;
  std::string out = "{\"feasible\":";
  out += r.feasible ? "true" : "false";
  out += ",\"active_constraint\":";
  out += json_string(to_string(r.active_constraint));
  out += ",\"theorem_path\":";
  out += json_string(to_string(r.theorem_path));
  out += ",\"mechanism\":" + to_json(r.mechanism);
  out += ",\"measures\":" + to_json(r.measures);
  out += ",\"diagnostics\":" + json_string(r.diagnostics);
  out += '}';
  return out;
}

inline ActiveConstraint active_constraint_from_string(const std::string& s) {
  if (s == "quality") return ActiveConstraint::quality;
  if (s == "security") return ActiveConstraint::security;
  if (s == "both-reported") return ActiveConstraint::both_reported;
  throw SerializationError("active_constraint: unknown value \"" + s + "\"");
}

inline TheoremPath theorem_path_from_string(const std::string& s) {
  if (s == "thm1") return TheoremPath::thm1;
  if (s == "thm2") return TheoremPath::thm2;
  if (s == "cor1") return TheoremPath::cor1;
  if (s == "dp") return TheoremPath::dp;
  throw SerializationError("theorem_path: unknown value \"" + s + "\"");
}

inline DesignResult design_result_from_json(const nlohmann::json& j) {
  using namespace serialize_detail;
  if (!j.is_object())
    throw SerializationError("design result: expected a JSON object");
  reject_unknown(j,
                 {"feasible", "active_constraint", "theorem_path", "mechanism",
                  "measures", "diagnostics"},
                 "design result");
  return DesignResult{
      mechanism_from_json(require_key(j, "mechanism", "design result")),
      active_constraint_from_string(
          parse_string(require_key(j, "active_constraint", "design result"),
                       "design result.active_constraint")),
      measures_from_json(require_key(j, "measures", "design result")),
      theorem_path_from_string(
          parse_string(require_key(j, "theorem_path", "design result"),
                       "design result.theorem_path")),
      parse_bool(require_key(j, "feasible", "design result"),
                 "design result.feasible"),
      parse_string(require_key(j, "diagnostics", "design result"),
                   "design result.diagnostics")};
}

inline DesignResult design_result_from_json(const std::string& text) {
  return design_result_from_json(
      serialize_detail::parse_document(text, "design result"));
}

// ---- detection report -------------------------------------------------------

inline std::string to_json(const DetectionReport& r) {
  using namespace serialize_detail;
  std::string out = "{\"n_responses\":" + std::to_string(r.n_responses);
  out += ",\"trials\":" + std::to_string(r.trials);
  out += ",\"kl_per_sample\":" + json_number(r.kl_per_sample);
  out += ",\"threshold\":" + json_number(r.threshold);
  out += ",\"false_positive_rate\":" + json_number(r.false_positive_rate);
  out += ",\"false_negative_rate\":" + json_number(r.false_negative_rate);
  out += ",\"fpr_standard_error\":" + json_number(r.fpr_standard_error);
  out += ",\"fnr_standard_error\":" + json_number(r.fnr_standard_error);
  out += ",\"detection_impossible\":";
  out += r.detection_impossible ? "true" : "false";
  out += '}';
  return out;
}

inline DetectionReport detection_report_from_json(const nlohmann::json& j) {
  using namespace serialize_detail;
  if (!j.is_object())
    throw SerializationError("detection report: expected a JSON object");
  const char* w = "detection report";
  reject_unknown(j,
                 {"n_responses", "trials", "kl_per_sample", "threshold",
                  "false_positive_rate", "false_negative_rate",
                  "fpr_standard_error", "fnr_standard_error",
                  "detection_impossible"},
                 w);
  return DetectionReport{
      parse_integer(require_key(j, "n_responses", w), "n_responses"),
      parse_number(require_key(j, "kl_per_sample", w), "kl_per_sample"),
      parse_number(require_key(j, "threshold", w), "threshold"),
      parse_number(require_key(j, "false_negative_rate", w),
                   "false_negative_rate"),
      parse_number(require_key(j, "false_positive_rate", w),
                   "false_positive_rate"),
      parse_integer(require_key(j, "trials", w), "trials"),
      parse_number(require_key(j, "fnr_standard_error", w),
                   "fnr_standard_error"),
      parse_number(require_key(j, "fpr_standard_error", w),
                   "fpr_standard_error"),
      parse_bool(require_key(j, "detection_impossible", w),
                 "detection_impossible")};
}

inline DetectionReport detection_report_from_json(const std::string& text) {
  return detection_report_from_json(
      serialize_detail::parse_document(text, "detection report"));
}

// ---- CSV --------------------------------------------------------------------

namespace serialize_detail {

inline std::string csv_number(double v) { return fmt17(v); }

}  // namespace serialize_detail

/**
 * Fixed header alpha,eta,privacy,security,quality,active_constraint,feasible;
 * rows sorted by (eta, alpha). Infeasible rows keep their flag and may carry
 * nan measures.
 */
inline std::string tradeoff_csv(std::vector<TradeoffRow> rows) {
  using namespace serialize_detail;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TradeoffRow& a, const TradeoffRow& b) {
                     if (a.eta != b.eta) return a.eta < b.eta;
                     return a.alpha < b.alpha;
                   });
  std::string out =
      "alpha,eta,privacy,security,quality,active_constraint,feasible\n";
  for (const TradeoffRow& r : rows) {
    out += csv_number(r.alpha);
    out += ',';
    out += csv_number(r.eta);
    out += ',';
    out += csv_number(r.privacy);
    out += ',';
    out += csv_number(r.security);
    out += ',';
    out += csv_number(r.quality);
    out += ',';
    out += to_string(r.active_constraint);
    out += ',';
    out += r.feasible ? "true" : "false";
    out += '\n';
  }
  return out;
}

/**
 * Fixed header inv_epsilon,security,kl_unit_bias; rows sorted ascending by
 * the sweep abscissa 1/epsilon (so both curves read monotone decreasing).
 */
inline std::string dp_csv(std::vector<TradeoffRow> rows) {
  using namespace serialize_detail;
  for (const TradeoffRow& r : rows)
    if (!(r.alpha > 0.0))
      throw InvalidArgumentError("dp_csv: rows must carry positive epsilon");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TradeoffRow& a, const TradeoffRow& b) {
                     return 1.0 / a.alpha < 1.0 / b.alpha;
                   });
  std::string out = "inv_epsilon,security,kl_unit_bias\n";
  for (const TradeoffRow& r : rows) {
    out += csv_number(1.0 / r.alpha);
    out += ',';
    out += csv_number(r.security);
    out += ',';
    out += csv_number(r.kl_unit_bias);
    out += '\n';
  }
  return out;
}

}  // namespace noiseforge
