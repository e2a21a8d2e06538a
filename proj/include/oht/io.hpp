#pragma once

// JSON and CSV formats.
//
// Scenario file:
//   {"M": 4, "nominal": [0.8, 0.2], "anomalies": [[0.2, 0.8]],
//    "symbols": ["a", "b"]}                       // symbols optional
// "anomalies" holds T distributions, or a single one shared by all ranks.
//
// Experiment spec file: a scenario plus
//   {"truth": [1] | null, "n": [100, 300], "lambda": 0.25 | "auto:0.2",
//    "trials": 10000, "seed": 7}
//
// Panel file: a JSON array of strings or integer arrays, or plain text with
// one sequence per line.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oht/detector.hpp"
#include "oht/montecarlo.hpp"
#include "oht/theory.hpp"

namespace oht::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, what + ": " + e.what());
  }
}

// Deterministic shortest-round-trip-ish decimal.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline Distribution distribution_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw Error(ErrorKind::ParseError, field + ": expected an array of numbers");
  std::vector<double> mass;
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorKind::ParseError, field + ": expected numbers");
    mass.push_back(v.get<double>());
  }
  try {
    return Distribution(std::move(mass));
  } catch (const Error& e) {
    throw Error(e.kind(), field + ": " + e.message());
  }
}

inline json to_json(const Distribution& d) { return json(std::vector<double>(d.mass().begin(), d.mass().end())); }

inline json to_json(const OutlierSet& B) {
  return json(std::vector<std::size_t>(B.members().begin(), B.members().end()));
}

inline OutlierSet outlier_set_from_json(const json& j, std::size_t M, const std::string& field) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::ParseError, field + ": expected a non-empty integer array");
  std::vector<std::size_t> members;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      throw Error(ErrorKind::ParseError, field + ": indices must be positive integers");
    members.push_back(v.get<std::size_t>());
  }
  return OutlierSet(std::move(members), M);
}

// Accepts "1,3", "[1,3]" or "{1;3}".
inline OutlierSet parse_outlier_set(std::string text, std::size_t M) {
  for (char& c : text)
    if (c == '[' || c == ']' || c == '{' || c == '}' || c == ';') c = ' ';
  for (char& c : text)
    if (c == ',') c = ' ';
  std::istringstream in(text);
  std::vector<std::size_t> members;
  long long v = 0;
  while (in >> v) {
    if (v < 1) throw Error(ErrorKind::ParseError, "set indices must be positive");
    members.push_back(static_cast<std::size_t>(v));
  }
  if (!in.eof()) throw Error(ErrorKind::ParseError, "malformed outlier set '" + text + "'");
  return OutlierSet(std::move(members), M);
}

inline Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "scenario must be a JSON object");
  for (const char* key : {"M", "nominal", "anomalies"})
    if (!j.contains(key)) throw Error(ErrorKind::ParseError, std::string("scenario: missing field '") + key + "'");
  if (!j["M"].is_number_integer() || j["M"].get<long long>() < 0)
    throw Error(ErrorKind::ParseError, "M: expected a non-negative integer");
  const auto M = j["M"].get<std::size_t>();
  Distribution nominal = distribution_from_json(j["nominal"], "nominal");
  if (j.contains("alphabet_size") && j["alphabet_size"].get<std::size_t>() != nominal.size())
    throw Error(ErrorKind::AlphabetMismatch, "alphabet_size disagrees with nominal");
  if (!j["anomalies"].is_array() || j["anomalies"].empty())
    throw Error(ErrorKind::ParseError, "anomalies: expected a non-empty array of distributions");
  std::vector<Distribution> anomalies;
  for (std::size_t k = 0; k < j["anomalies"].size(); ++k)
    anomalies.push_back(distribution_from_json(j["anomalies"][k], "anomalies[" + std::to_string(k) + "]"));
  if (anomalies.size() == 1 && max_outliers(M) > 1) anomalies.assign(max_outliers(M), anomalies.front());
  return Scenario(M, std::move(nominal), std::move(anomalies));
}

inline json to_json(const Scenario& sc) {
  json j;
  j["M"] = sc.M();
  j["nominal"] = to_json(sc.nominal());
  j["anomalies"] = json::array();
  for (const auto& a : sc.anomalies()) j["anomalies"].push_back(to_json(a));
  return j;
}

inline LambdaSpec parse_lambda(const std::string& text) {
  try {
    if (text.rfind("auto:", 0) == 0) return LambdaSpec::automatic(std::stod(text.substr(5)));
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return LambdaSpec::fixed(v);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::ParseError, "lambda: expected a number or auto:<epsilon>, got '" + text + "'");
  }
}

// "lo:hi:steps" -> steps evenly spaced values from lo to hi inclusive.
inline std::vector<double> parse_lambda_grid(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) throw Error(ErrorKind::ParseError, "lambda grid: expected lo:hi:steps, got '" + text + "'");
  double lo = 0.0, hi = 0.0;
  long long steps = 0;
  try {
    lo = std::stod(text.substr(0, a));
    hi = std::stod(text.substr(a + 1, b - a - 1));
    steps = std::stoll(text.substr(b + 1));
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::ParseError, "lambda grid: expected lo:hi:steps, got '" + text + "'");
  }
  if (steps < 1 || !(lo > 0.0) || hi < lo)
    throw Error(ErrorKind::ParseError, "lambda grid: need 0 < lo <= hi and steps >= 1");
  std::vector<double> grid;
  for (long long k = 0; k < steps; ++k)
    grid.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1));
  return grid;
}

inline ExperimentSpec experiment_from_json(const json& j) {
  Scenario sc = scenario_from_json(j);
  std::optional<OutlierSet> truth;
  if (j.contains("truth") && !j["truth"].is_null()) truth = outlier_set_from_json(j["truth"], sc.M(), "truth");
  if (!j.contains("n") || !j["n"].is_array() || j["n"].empty())
    throw Error(ErrorKind::ParseError, "n: expected a non-empty array of lengths");
  std::vector<std::size_t> grid;
  for (const auto& v : j["n"]) {
    if (!v.is_number_integer() || v.get<long long>() < 1)
      throw Error(ErrorKind::ParseError, "n: lengths must be positive integers");
    grid.push_back(v.get<std::size_t>());
  }
  if (!j.contains("lambda")) throw Error(ErrorKind::ParseError, "scenario: missing field 'lambda'");
  const LambdaSpec lambda =
      j["lambda"].is_string() ? parse_lambda(j["lambda"].get<std::string>()) : LambdaSpec::fixed(j["lambda"].get<double>());
  ExperimentSpec spec{std::move(sc), std::move(truth), std::move(grid), lambda, 10000, 1};
  if (j.contains("trials")) spec.trials = j["trials"].get<std::size_t>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  spec.validate();
  return spec;
}

struct Panel {
  Alphabet alphabet;
  std::vector<SymbolSequence> sequences;
};

namespace detail {

inline Panel panel_from_strings(const std::vector<std::string>& lines, const std::optional<Alphabet>& alphabet) {
  if (alphabet) {
    std::vector<SymbolSequence> seqs;
    for (const auto& l : lines) seqs.push_back(encode(l, *alphabet));
    return {*alphabet, std::move(seqs)};
  }
  std::set<std::string> seen;
  for (const auto& l : lines)
    for (auto& cp : split_utf8(l)) seen.insert(cp);
  std::vector<std::string> labels(seen.begin(), seen.end());
  // A single observed symbol still needs a two-letter alphabet.
  if (labels.size() == 1) labels.push_back(labels.front() == "\x01" ? std::string("\x02") : std::string("\x01"));
  if (labels.empty()) throw Error(ErrorKind::EmptySequence, "panel has no symbols");
  Alphabet inferred(labels);
  std::vector<SymbolSequence> seqs;
  for (const auto& l : lines) seqs.push_back(encode(l, inferred));
  return {inferred, std::move(seqs)};
}

}  // namespace detail

// Symbols are inferred (sorted distinct code points, or 0..max for integer
// arrays) unless an alphabet is supplied.
inline Panel parse_panel(const std::string& text, const std::optional<Alphabet>& alphabet = std::nullopt) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const json j = parse_json(text, "panel");
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::ParseError, "panel: expected a non-empty array");
    if (j.front().is_string()) {
      std::vector<std::string> lines;
      for (const auto& v : j) {
        if (!v.is_string()) throw Error(ErrorKind::ParseError, "panel: mixed entry types");
        lines.push_back(v.get<std::string>());
      }
      return detail::panel_from_strings(lines, alphabet);
    }
    std::vector<SymbolSequence> seqs;
    std::size_t top = 0;
    for (const auto& v : j) {
      if (!v.is_array()) throw Error(ErrorKind::ParseError, "panel: expected strings or integer arrays");
      SymbolSequence s;
      for (const auto& x : v) {
        if (!x.is_number_integer() || x.get<long long>() < 0)
          throw Error(ErrorKind::ParseError, "panel: symbols must be non-negative integers");
        s.push_back(x.get<std::size_t>());
        top = std::max(top, s.back());
      }
      seqs.push_back(std::move(s));
    }
    Alphabet a = alphabet ? *alphabet : Alphabet(std::max<std::size_t>(top + 1, 2));
    for (const auto& s : seqs)
      for (Symbol x : s)
        if (x >= a.size()) throw Error(ErrorKind::UnknownSymbol, "symbol " + std::to_string(x) + " outside alphabet");
    return {a, std::move(seqs)};
  }
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(ErrorKind::ParseError, "panel: no sequences");
  return detail::panel_from_strings(lines, alphabet);
}

inline ordered_json verdict_json(const Verdict& v) {
  ordered_json j;
  if (v.is_reject()) {
    j["verdict"] = "reject";
  } else {
    j["verdict"] = "outliers";
    j["set"] = std::vector<std::size_t>(v.set().members().begin(), v.set().members().end());
  }
  return j;
}

inline ordered_json profile_json(const TheoryProfile& p) {
  ordered_json j;
  j["set"] = std::vector<std::size_t>(p.B.members().begin(), p.B.members().end());
  j["rivals"] = ordered_json::array();
  for (std::size_t i = 0; i < p.rivals.size(); ++i) {
    ordered_json r;
    r["set"] = std::vector<std::size_t>(p.rivals[i].members().begin(), p.rivals[i].members().end());
    r["gd"] = p.gd[i];
    r["variance"] = p.V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    j["rivals"].push_back(r);
  }
  j["gd_min"] = p.gd_min;
  j["d"] = p.d;
  ordered_json V = ordered_json::array();
  for (Eigen::Index a = 0; a < p.V.rows(); ++a) {
    std::vector<double> row(static_cast<std::size_t>(p.V.cols()));
    for (Eigen::Index b = 0; b < p.V.cols(); ++b) row[static_cast<std::size_t>(b)] = p.V(a, b);
    V.push_back(row);
  }
  j["V"] = V;
  return j;
}

// CSV

inline const char* kReportHeader =
    "hypothesis,n,lambda,miscls,miscls_lo,miscls_hi,reject,reject_lo,reject_hi,falarm,falarm_lo,falarm_hi,"
    "bound_miscls,bound_falarm,bound_reject";

inline void write_report_csv(const TrialReport& report, std::ostream& out) {
  auto interval = [](const std::optional<Interval>& iv) {
    if (!iv) return std::string(",,");
    return format_double(iv->estimate) + "," + format_double(iv->lo) + "," + format_double(iv->hi);
  };
  out << kReportHeader << "\n";
  for (const auto& r : report.rows) {
    out << r.hypothesis << "," << r.n << "," << format_double(r.lambda) << "," << interval(r.miscls) << ","
        << interval(r.reject) << "," << interval(r.falarm) << "," << format_double(r.bound_miscls) << ","
        << format_double(r.bound_falarm) << "," << (r.bound_reject ? format_double(*r.bound_reject) : "") << "\n";
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

// Reads a report CSV back; counts are not stored, so tallies are left zero.
inline TrialReport read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) throw Error(ErrorKind::ParseError, "unexpected report header");
  auto num = [](const std::string& s) { return std::stod(s); };
  auto interval = [&](const std::vector<std::string>& f, std::size_t at) -> std::optional<Interval> {
    if (f[at].empty()) return std::nullopt;
    return Interval{num(f[at]), num(f[at + 1]), num(f[at + 2])};
  };
  TrialReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 15) throw Error(ErrorKind::ParseError, "report row has " + std::to_string(f.size()) + " fields");
    ReportRow r;
    r.hypothesis = f[0];
    r.n = static_cast<std::size_t>(std::stoull(f[1]));
    r.lambda = num(f[2]);
    r.miscls = interval(f, 3);
    r.reject = interval(f, 6);
    r.falarm = interval(f, 9);
    r.bound_miscls = num(f[12]);
    r.bound_falarm = num(f[13]);
    if (!f[14].empty()) r.bound_reject = num(f[14]);
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace oht::io
