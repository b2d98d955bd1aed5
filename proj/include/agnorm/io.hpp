#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "audit.hpp"
#include "bohr.hpp"
#include "decompose.hpp"
#include "pairs.hpp"

namespace agnorm {

using json = nlohmann::ordered_json;

// Rounded to 15 significant digits so dumps are stable across platforms.
inline double json_number(double x) {
  if (!std::isfinite(x)) throw NumericalError("non-finite value in JSON output");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  double r = std::strtod(buf, nullptr);
  return r == 0 ? 0.0 : r;
}

inline json complex_json(cplx z) { return json::array({json_number(z.real()), json_number(z.imag())}); }

inline json subset_json(const Subset& a) {
  json out = json::array();
  for (elem x : a.members()) out.push_back(x);
  return out;
}

inline Subset subset_from_json(const json& j, const GroupPtr& g) {
  if (!j.is_array()) throw UsageError("subset must be a JSON array of element indices");
  Subset out(g);
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw UsageError("subset entries must be integers");
    long x = v.get<long>();
    if (x < 0 || std::size_t(x) >= g->order())
      throw UsageError("element " + std::to_string(x) + " out of range for order " + std::to_string(g->order()));
    out.insert(elem(x));
  }
  return out;
}

inline json function_json(const Function& f) {
  json vals = json::array();
  for (elem x = 0; x < f.size(); ++x) vals.push_back(complex_json(f[x]));
  return {{"group", f.group().spec()}, {"values", vals}};
}

// Accepts {"values": [[re,im] or re, ...]} or {"subset": [...]}; a "group" key must
// agree with g when g is given.
inline Function function_from_json(const json& j, GroupPtr g = nullptr) {
  if (!j.is_object()) throw UsageError("function must be a JSON object");
  if (j.contains("group")) {
    GroupPtr named = build_group(j.at("group").get<std::string>());
    if (g && !g->same_as(*named)) throw UsageError("function group does not match --group");
    if (!g) g = named;
  }
  if (!g) throw UsageError("function needs a group");
  if (j.contains("subset")) return Function::indicator(subset_from_json(j.at("subset"), g));
  if (!j.contains("values")) throw UsageError("function needs \"values\" or \"subset\"");
  const json& v = j.at("values");
  if (!v.is_array() || v.size() != g->order()) throw UsageError("values must list one entry per element");
  std::vector<cplx> out;
  for (const auto& e : v) {
    if (e.is_number()) out.emplace_back(e.get<double>(), 0.0);
    else if (e.is_array() && e.size() == 2) out.emplace_back(e[0].get<double>(), e[1].get<double>());
    else throw UsageError("each value must be a number or [re,im]");
  }
  return Function(g, std::move(out));
}

inline MultiplicativePair pair_from_json(const json& j, const GroupPtr& g) {
  for (const char* k : {"ground", "perturb", "upper", "lower"})
    if (!j.contains(k)) throw UsageError(std::string("pair JSON needs \"") + k + "\"");
  int r = 1;
  if (j.contains("r")) {
    if (j.at("r").is_string() && j.at("r").get<std::string>() == "inf") r = unbounded_r;
    else r = j.at("r").get<int>();
  }
  return {subset_from_json(j.at("ground"), g), subset_from_json(j.at("perturb"), g),
          subset_from_json(j.at("upper"), g), subset_from_json(j.at("lower"), g), r};
}

inline json pair_json(const MultiplicativePair& p) {
  json r = p.r == unbounded_r ? json("inf") : json(p.r);
  return {{"ground", subset_json(p.ground)}, {"perturb", subset_json(p.perturb)}, {"upper", subset_json(p.upper)},
          {"lower", subset_json(p.lower)}, {"r", r}};
}

inline json pair_report_json(const PairReport& rep) {
  return {{"valid", rep.valid},
          {"valid_r", rep.valid_r},
          {"epsilon", json_number(rep.epsilon)},
          {"epsilon_fraction", json::array({rep.epsilon_num, rep.epsilon_den})},
          {"thickness", json_number(rep.thickness)},
          {"failures", rep.failures}};
}

inline json audit_json(const AuditLog& log) {
  json out = json::array();
  for (const auto& e : log.entries())
    out.push_back({{"stage", e.stage},
                   {"check", e.check},
                   {"lhs", json_number(e.lhs)},
                   {"rhs", json_number(e.rhs)},
                   {"passed", e.passed}});
  return out;
}

inline json decomposition_json(const CosetDecomposition& d) {
  json terms = json::array();
  for (const auto& t : d.terms)
    terms.push_back({{"z", t.coefficient}, {"subgroup", subset_json(t.subgroup)}, {"rep", t.rep}});
  json norms = json::array();
  for (double v : d.norms) norms.push_back(json_number(v));
  return {{"terms", terms}, {"steps", d.norms.empty() ? 0 : d.norms.size() - 1}, {"norms", norms}};
}

// {"matrices": [[[re,im],...] rows ...] per element} or a bare list of matrices.
inline UnitaryRep rep_from_json(const json& j, const GroupPtr& g) {
  const json& mats = j.is_object() ? j.at("matrices") : j;
  if (!mats.is_array()) throw UsageError("representation must be a list of matrices");
  std::vector<Matrix> out;
  for (const auto& m : mats) {
    if (!m.is_array() || m.empty()) throw UsageError("matrix must be a non-empty list of rows");
    auto d = Eigen::Index(m.size());
    Matrix mm(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      const json& row = m[std::size_t(r)];
      if (!row.is_array() || Eigen::Index(row.size()) != d) throw UsageError("matrix rows must have length d");
      for (Eigen::Index c = 0; c < d; ++c) {
        const json& e = row[std::size_t(c)];
        mm(r, c) = e.is_number() ? cplx(e.get<double>(), 0) : cplx(e[0].get<double>(), e[1].get<double>());
      }
    }
    out.push_back(mm);
  }
  return UnitaryRep(g, std::move(out));
}

// Inline JSON text, or @path to read it from a file.
inline json parse_json_arg(const std::string& s) {
  std::string text = s;
  if (!s.empty() && s[0] == '@') {
    std::ifstream in(s.substr(1));
    if (!in) throw UsageError("cannot open " + s.substr(1));
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace agnorm
