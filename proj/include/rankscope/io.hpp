#pragma once

// JSON interchange. Needs the vendored nlohmann header (json.hpp) on the
// include path.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rankscope/afr.hpp"
#include "rankscope/canonical.hpp"
#include "rankscope/constructions.hpp"
#include "rankscope/cp.hpp"
#include "rankscope/hurwitz_radon.hpp"
#include "rankscope/typical_rank.hpp"

namespace rankscope {

using json = nlohmann::json;
using AnyTensor = std::variant<IntTensor, RealTensor>;

inline RealTensor to_real(const AnyTensor& t) {
  return std::visit([](const auto& x) { return RealTensor(to_real(x)); }, t);
}

// ---- scalars and matrices ----

/// Integers that fit in 64 bits are JSON numbers, larger ones digit strings.
inline json integer_to_json(const Integer& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return static_cast<std::int64_t>(v);
  return v.str();
}

inline Integer integer_from_json(const json& j) {
  if (j.is_number_integer()) return j.is_number_unsigned() ? Integer(j.get<std::uint64_t>()) : Integer(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const std::size_t start = !s.empty() && (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (s.size() == start || s.find_first_not_of("0123456789", start) != std::string::npos)
      fail(ErrorCode::KindMismatch, "not an integer: " + s);
    return Integer(s);
  }
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (std::isfinite(d) && d == std::trunc(d) && std::fabs(d) < 9e15) return Integer(static_cast<std::int64_t>(d));
  }
  fail(ErrorCode::KindMismatch, "expected an integer entry, got " + j.dump());
}

inline double real_from_json(const json& j) {
  if (!j.is_number()) fail(ErrorCode::KindMismatch, "expected a number, got " + j.dump());
  return j.get<double>();
}

template <class Scalar>
json matrix_to_json(const Matrix<Scalar>& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if constexpr (is_exact_v<Scalar>) row.push_back(integer_to_json(a(i, j)));
      else row.push_back(a(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class Scalar>
Matrix<Scalar> matrix_from_json(const json& j, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) fail(ErrorCode::BadShape, "matrix must have " + std::to_string(rows) + " rows");
  Matrix<Scalar> out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || row.size() != cols)
      fail(ErrorCode::BadShape, "row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      if constexpr (is_exact_v<Scalar>) out(i, c) = integer_from_json(row[c]);
      else out(i, c) = real_from_json(row[c]);
    }
  }
  return out;
}

/// Matrix whose shape is read from the data.
inline RealMat real_matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) fail(ErrorCode::BadShape, "expected a nonempty matrix");
  return matrix_from_json<double>(j, j.size(), j[0].size());
}

// ---- tensors ----

template <class Scalar>
json tensor_to_json(const Tensor3<Scalar>& t) {
  json slices = json::array();
  for (const auto& s : t.slices()) slices.push_back(matrix_to_json(s));
  return {{"m", t.m()}, {"n", t.n()}, {"p", t.p()}, {"kind", is_exact_v<Scalar> ? "int" : "real"}, {"slices", slices}};
}

inline json tensor_to_json(const AnyTensor& t) {
  return std::visit([](const auto& x) { return tensor_to_json(x); }, t);
}

inline AnyTensor tensor_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::BadShape, "tensor document must be an object");
  for (const char* key : {"m", "n", "p", "kind", "slices"})
    if (!j.contains(key)) fail(ErrorCode::BadShape, std::string("tensor document lacks \"") + key + "\"");
  for (const char* key : {"m", "n", "p"})
    if (!j[key].is_number_integer() || j[key].get<long long>() < 1)
      fail(ErrorCode::BadShape, std::string("\"") + key + "\" must be a positive integer");
  const auto m = j["m"].get<std::size_t>(), n = j["n"].get<std::size_t>(), p = j["p"].get<std::size_t>();
  const json& slices = j["slices"];
  if (!slices.is_array() || slices.size() != p) fail(ErrorCode::BadShape, "expected p = " + std::to_string(p) + " slices");
  const std::string kind = j["kind"].is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "int") {
    std::vector<IntMat> s;
    for (const auto& sl : slices) s.push_back(matrix_from_json<Integer>(sl, m, n));
    return IntTensor(std::move(s));
  }
  if (kind == "real") {
    std::vector<RealMat> s;
    for (const auto& sl : slices) s.push_back(matrix_from_json<double>(sl, m, n));
    return RealTensor(std::move(s));
  }
  fail(ErrorCode::KindMismatch, "kind must be \"int\" or \"real\"");
}

// ---- families, sequences ----

inline json family_to_json(const HRFamily& f) {
  json members = json::array();
  for (const auto& a : f.members) members.push_back(matrix_to_json(a));
  return {{"order", f.order}, {"members", members}};
}

inline HRFamily family_from_json(const json& j) {
  if (!j.is_object() || !j.contains("order") || !j.contains("members") || !j["members"].is_array())
    fail(ErrorCode::BadShape, "family document needs \"order\" and \"members\"");
  HRFamily f{j["order"].get<std::size_t>(), {}};
  for (const auto& a : j["members"]) f.members.push_back(matrix_from_json<Integer>(a, f.order, f.order));
  return f;
}

inline json seq_to_json(const CondSeq& s) {
  json extras = json::array();
  for (const auto& e : s.extras) extras.push_back(matrix_to_json(e));
  return {{"n", s.n}, {"l", s.l}, {"m", s.m}, {"A", matrix_to_json(s.a)}, {"extras", extras}};
}

inline CondSeq seq_from_json(const json& j) {
  for (const char* key : {"n", "l", "m", "A", "extras"})
    if (!j.contains(key)) fail(ErrorCode::BadShape, std::string("sequence document lacks \"") + key + "\"");
  CondSeq s;
  s.n = j["n"].get<std::size_t>();
  s.l = j["l"].get<std::size_t>();
  s.m = j["m"].get<std::size_t>();
  if (s.l >= s.n) fail(ErrorCode::BadShape, "sequence needs l < n");
  s.a = matrix_from_json<double>(j["A"], s.n, 2 * s.n - s.l);
  if (!j["extras"].is_array()) fail(ErrorCode::BadShape, "\"extras\" must be an array");
  for (const auto& e : j["extras"]) s.extras.push_back(matrix_from_json<double>(e, s.n, s.n));
  s.validate();
  return s;
}

// ---- results ----

inline json vector_to_json(const EVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json verdict_to_json(const AfrVerdict& v) {
  json out{{"status", to_string(v.status)}};
  if (v.certified()) out["margin"] = v.margin;
  if (v.witness)
    out["witness"] = {{"x", vector_to_json(v.witness->x)}, {"y", vector_to_json(v.witness->y)},
                      {"residual", v.witness->residual}};
  return out;
}

inline json canon_to_json(const CanonResult& r) {
  return {{"P", matrix_to_json(r.pmat)},       {"Q", matrix_to_json(r.qmat)}, {"canonical", tensor_to_json(r.canonical)},
          {"residual", r.residual},            {"condP", r.cond_p},           {"condQ", r.cond_q}};
}

inline json detector_to_json(const DetectorVerdict& v, bool with_stacked = true) {
  json out{{"status", to_string(v.status)},
           {"certified", v.certified},
           {"transcript",
            {{"canonical_residual", v.transcript.canonical_residual},
             {"condP", v.transcript.cond_p},
             {"condQ", v.transcript.cond_q},
             {"condV", v.transcript.cond_v},
             {"afr", to_string(v.transcript.afr)},
             {"margin", v.transcript.margin},
             {"pass", v.transcript.pass},
             {"note", v.transcript.note}}}};
  if (with_stacked && v.stacked) out["stacked"] = tensor_to_json(*v.stacked);
  return out;
}

inline json cp_to_json(const CpFit& f, std::size_t rank) {
  json out{{"rank", rank}, {"result", f.found ? "FitFound" : "NoFit"}, {"restarts_used", f.restarts_used}};
  out[f.found ? "residual" : "best_residual"] = f.residual;
  return out;
}

/// Summary without the wall-clock field, which is the only part that can
/// differ between identical runs.
inline json summary_to_json(const McSummary& s, bool with_runtime = true) {
  json out{{"shape", {{"m", s.m}, {"n", s.n}, {"p", s.p}}},
           {"samples", s.samples},
           {"seed", s.seed},
           {"crosscheck", s.crosscheck},
           {"counts", s.counts},
           {"certified_higher", s.certified_higher},
           {"fit_p", s.fit_p},
           {"fraction_higher", s.fraction_higher},
           {"fraction_fit_p", s.fraction_fit_p}};
  if (with_runtime) out["runtime"] = s.runtime;
  return out;
}

inline std::string summary_to_csv(const McSummary& s) {
  std::ostringstream os;
  os << "m,n,p,samples,seed,status,count\n";
  for (const auto& [k, v] : s.counts) os << s.m << ',' << s.n << ',' << s.p << ',' << s.samples << ',' << s.seed << ',' << k << ',' << v << '\n';
  os << s.m << ',' << s.n << ',' << s.p << ',' << s.samples << ',' << s.seed << ",FitP," << s.fit_p << '\n';
  return os.str();
}

// ---- files ----

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace rankscope
