#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "agnorm/io.hpp"
#include "agnorm/verify.hpp"

using namespace agnorm;

namespace {

struct Options {
  std::string group = "cyclic:4";
  std::string function;
  std::string set;
  std::string pair;
  std::string rep;
  std::string build = "product";
  std::string stage = "correlation";
  std::string suite;
  std::string json_out;
  std::string catalog_dir;
  double eta = 0.5;
  double delta = 0.5;
  double eps = 0.5;
  int r = 1;
  int max_steps = 64;
  int budget = 16;
  int levels = 2;
  int samples = 64;
  std::uint64_t seed = 0;
  bool table = false;
};

Subset parse_set(const Options& o, const GroupPtr& g) {
  if (o.set.empty()) throw UsageError("--set is required");
  return subset_from_json(parse_json_arg(o.set), g);
}

Function parse_function(const Options& o, const GroupPtr& g) {
  if (o.function.empty()) throw UsageError("--function is required");
  return function_from_json(parse_json_arg(o.function), g);
}

json values_json(const RealVector& s) {
  json out = json::array();
  for (Eigen::Index i = 0; i < s.size(); ++i) out.push_back(json_number(s(i)));
  return out;
}

json values_json(const std::vector<double>& s) {
  json out = json::array();
  for (double v : s) out.push_back(json_number(v));
  return out;
}

json cmd_group(const Options& o) {
  GroupPtr g = build_group(o.group);
  json subs = json::array();
  for (const auto& h : subgroups(g)) subs.push_back(subset_json(h));
  json out{{"group", g->spec()},
           {"order", g->order()},
           {"identity", g->identity()},
           {"abelian", g->is_abelian()},
           {"labels", g->labels()},
           {"subgroups", subs}};
  if (o.table) {
    json rows = json::array();
    for (elem x = 0; x < g->order(); ++x) {
      json row = json::array();
      for (elem y = 0; y < g->order(); ++y) row.push_back(g->mul(x, y));
      rows.push_back(row);
    }
    out["table"] = rows;
  }
  return out;
}

json cmd_norm(const Options& o) {
  GroupPtr g = build_group(o.group);
  Function f = parse_function(o, g);
  RealVector s = singular_values(f);
  return {{"group", g->spec()},
          {"a_norm", json_number(nuclear_sum(s))},
          {"pm_norm", json_number(s.size() ? s(0) : 0.0)},
          {"l1", json_number(f.l1_norm())},
          {"l2", json_number(f.l2_norm())},
          {"sup", json_number(f.sup_norm())},
          {"singular_values", values_json(s)}};
}

json cmd_spectrum(const Options& o) {
  GroupPtr g = build_group(o.group);
  Function f = parse_function(o, g);
  if (o.pair.empty()) {
    auto basis = fourier_basis(f);
    json vecs = json::array();
    for (const auto& v : basis.vectors) vecs.push_back(function_json(v)["values"]);
    return {{"group", g->spec()}, {"singular_values", values_json(basis.values)}, {"basis", vecs}};
  }
  MultiplicativePair p = pair_from_json(parse_json_arg(o.pair), g);
  SpectrumSlice slice = spectrum(p, f, o.delta);
  RegularDelta reg = regular_delta(p, f, o.delta);
  json vecs = json::array();
  for (const auto& v : slice.basis) vecs.push_back(function_json(v)["values"]);
  return {{"group", g->spec()},
          {"delta", json_number(o.delta)},
          {"dim", slice.dim()},
          {"singular_values", values_json(slice.values)},
          {"l1", json_number(slice.l1)},
          {"width", json_number(slice.width)},
          {"regular_delta", json_number(reg.delta)},
          {"regular_eta", json_number(reg.eta)},
          {"basis", vecs}};
}

json cmd_symset(const Options& o) {
  GroupPtr g = build_group(o.group);
  Subset a = parse_set(o, g);
  Subset s = symmetry_set(a, o.eta);
  return {{"members", subset_json(s)},
          {"size", s.size()},
          {"energy", json_number(energy(s))},
          {"doubling", json_number(doubling(s))}};
}

json cmd_pair(const Options& o) {
  GroupPtr g = build_group(o.group);
  MultiplicativePair p;
  if (!o.pair.empty()) {
    p = pair_from_json(parse_json_arg(o.pair), g);
  } else {
    Subset a = parse_set(o, g);
    if (o.build == "product") p = pair_from_product_set(a, o.r);
    else if (o.build == "growth") p = pair_from_growth(a, o.r, o.eps);
    else if (o.build == "subgroup") p = pair_from_subgroup(a);
    else throw UsageError("--build must be product, growth or subgroup");
  }
  PairReport rep = validate_pair(p);
  return {{"pair", pair_json(p)}, {"report", pair_report_json(rep)}};
}

json cmd_bohr(const Options& o) {
  GroupPtr g = build_group(o.group);
  if (o.rep.empty()) throw UsageError("--rep is required");
  UnitaryRep rep = rep_from_json(parse_json_arg(o.rep), g);
  Subset b = bohr_set(rep, o.delta);
  Subset cover = unitary_cover_subset(b, rep.matrices(), o.delta, o.samples, o.seed);
  return {{"bohr", subset_json(b)}, {"cover", subset_json(cover)}, {"ratio", json_number(double(cover.size()) / double(b.size()))}};
}

json cmd_freiman(const Options& o, AuditLog& log) {
  GroupPtr g = build_group(o.group);
  Subset a = parse_set(o, g);
  json out{{"group", g->spec()}, {"stage", o.stage}};
  if (o.stage == "fournier") {
    auto res = fournier_subgroup(a, o.eta, log);
    out["subgroup"] = subset_json(res.subgroup);
    out["shift"] = res.shift;
    out["overlap"] = json_number(res.overlap);
  } else if (o.stage == "witness") {
    auto res = sym_witness_search(a, o.eps, o.budget, o.seed);
    out["witness"] = subset_json(res.witness);
    out["sym"] = subset_json(res.sym);
    out["size"] = json_number(res.size);
  } else if (o.stage == "tripling") {
    auto res = doubling_to_tripling(a, log, o.budget, o.seed);
    out["set"] = subset_json(res.set);
    out["shift"] = res.shift;
    out["size_ratio"] = json_number(res.size_ratio);
    out["tripling"] = json_number(res.tripling);
  } else if (o.stage == "weak") {
    auto res = weak_freiman(a, o.r, o.eps, log, o.budget, o.seed);
    out["pair"] = pair_json(res.pair);
    out["report"] = pair_report_json(validate_pair(res.pair));
    out["threshold"] = json_number(res.threshold);
  } else if (o.stage == "correlation") {
    auto res = freiman_correlation(a, o.r, o.eps, log, o.budget, o.seed);
    out["pair"] = pair_json(res.pair);
    out["sup"] = json_number(res.sup);
  } else if (o.stage == "system") {
    StepTable rs = StepTable::constant(o.r), es = StepTable::constant(o.eps);
    auto res = pair_system(a, rs, es, o.levels, log, o.budget, o.seed);
    json sets = json::array();
    for (const auto& s : res.sets) sets.push_back(subset_json(s));
    out["sets"] = sets;
  } else {
    throw UsageError("--stage must be fournier, witness, tripling, weak, correlation or system");
  }
  return out;
}

json cmd_decompose(const Options& o) {
  GroupPtr g = build_group(o.group);
  Function f = parse_function(o, g);
  return decomposition_json(idempotent_decompose(f, o.max_steps));
}

json suite_json(const SuiteReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"trials", c.trials},
                      {"failures", c.failures},
                      {"worst_excess", json_number(c.worst_excess)},
                      {"first_failure", c.first_failure}});
  json notes = json::object();
  for (const auto& [k, v] : rep.notes) notes[k] = json_number(v);
  return {{"suite", rep.suite}, {"group", rep.group}, {"passed", rep.passed()}, {"checks", checks}, {"notes", notes}};
}

void write_catalog(const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& spec : catalog_specs()) {
    std::ofstream out(std::filesystem::path(dir) / catalog_file_name(spec));
    if (!out) throw UsageError("cannot write into " + dir);
    write_cayley_table(out, *build_group(spec));
  }
}

void emit(const json& j, const std::string& path) {
  std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algebra norms, multiplicative pairs and coset decompositions on finite groups"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--json", o.json_out, "Write the JSON report to this path (default stdout)");
  app.add_option("--seed", o.seed, "Seed for randomized searches");

  auto with_group = [&](CLI::App* c) {
    c->add_option("--group", o.group, "Group spec (cyclic:n, dihedral:n, quaternion:n, symmetric:n, AxB) or @file");
    c->add_option("--json", o.json_out, "Write the JSON report to this path (default stdout)");
    c->add_option("--seed", o.seed, "Seed for randomized searches");
    return c;
  };

  auto* group = with_group(app.add_subcommand("group", "Describe a group and its subgroups"));
  group->add_flag("--table", o.table, "Include the Cayley table");

  auto* norm = with_group(app.add_subcommand("norm", "Algebra and PM norms of a function"));
  norm->add_option("--function", o.function, "Function JSON or @file")->required();

  auto* spec = with_group(app.add_subcommand("spectrum", "Fourier basis, or a local spectrum slice with --pair"));
  spec->add_option("--function", o.function, "Function JSON or @file")->required();
  spec->add_option("--pair", o.pair, "Pair JSON for the local spectrum");
  spec->add_option("--delta", o.delta, "Spectrum threshold");

  auto* symset = with_group(app.add_subcommand("symset", "Symmetry set of a subset"));
  symset->add_option("--set", o.set, "Element indices as a JSON array")->required();
  symset->add_option("--eta", o.eta, "Threshold in (0,1]");

  auto* pair = with_group(app.add_subcommand("pair", "Build or validate a multiplicative pair"));
  pair->add_option("--pair", o.pair, "Pair JSON {ground, perturb, upper, lower, r}");
  pair->add_option("--set", o.set, "Generator set when building");
  pair->add_option("--build", o.build, "product, growth or subgroup");
  pair->add_option("--r", o.r, "Width");
  pair->add_option("--eps", o.eps, "Closure target for growth pairs");

  auto* bohr = with_group(app.add_subcommand("bohr", "Bohr set of a unitary representation and a cover subset"));
  bohr->add_option("--rep", o.rep, "Representation JSON or @file")->required();
  bohr->add_option("--delta", o.delta, "Radius in [0,2]");
  bohr->add_option("--samples", o.samples, "Haar samples for the cover search");

  auto* freiman = with_group(app.add_subcommand("freiman", "Run a stage of the Freiman pipeline"));
  freiman->add_option("--set", o.set, "Element indices as a JSON array")->required();
  freiman->add_option("--stage", o.stage, "fournier, witness, tripling, weak, correlation or system");
  freiman->add_option("--eta", o.eta, "Fournier threshold");
  freiman->add_option("--eps", o.eps, "Closure or witness parameter");
  freiman->add_option("--r", o.r, "Width");
  freiman->add_option("--budget", o.budget, "Random witness candidates");
  freiman->add_option("--levels", o.levels, "Levels for the pair system");

  auto* decompose = with_group(app.add_subcommand("decompose", "Coset decomposition of an integer-valued function"));
  decompose->add_option("--function", o.function, "Function JSON or @file")->required();
  decompose->add_option("--max-steps", o.max_steps, "Iteration cap");

  auto* verify = with_group(app.add_subcommand("verify", "Run a named property suite"));
  verify->add_option("--suite", o.suite, "Suite name")->required();

  auto* catalog = app.add_subcommand("catalog", "Write the catalog Cayley tables");
  catalog->add_option("--out", o.catalog_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  AuditLog log;
  try {
    if (*catalog) {
      write_catalog(o.catalog_dir);
      return 0;
    }
    json out;
    int code = 0;
    if (*group) out = cmd_group(o);
    else if (*norm) out = cmd_norm(o);
    else if (*spec) out = cmd_spectrum(o);
    else if (*symset) out = cmd_symset(o);
    else if (*pair) {
      out = cmd_pair(o);
      if (!out["report"]["valid"].get<bool>()) code = 1;
    } else if (*bohr) out = cmd_bohr(o);
    else if (*freiman) {
      out = cmd_freiman(o, log);
      out["audits"] = audit_json(log);
    } else if (*decompose) out = cmd_decompose(o);
    else if (*verify) {
      SuiteReport rep = run_suite(o.suite, build_group(o.group), o.seed);
      out = suite_json(rep);
      if (!rep.passed()) code = 1;
    }
    emit(out, o.json_out);
    return code;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DecompositionError& e) {
    json out{{"error", e.what()}, {"partial", decomposition_json(e.partial())}, {"residual", function_json(e.residual())}};
    emit(out, o.json_out);
    std::cerr << "assertion failed: " << e.what() << "\n";
    return 1;
  } catch (const AuditError& e) {
    json out{{"error", e.what()}, {"stage", e.stage()}, {"audits", audit_json(log)}};
    emit(out, o.json_out);
    std::cerr << "assertion failed: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
