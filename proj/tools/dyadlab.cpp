#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/norms.hpp"
#include "dyadlab/parallel.hpp"
#include "dyadlab/probes.hpp"

using namespace dyadlab;
using namespace dyadlab::cli;

namespace {

struct Outcome {
  Json report;
  CsvTable csv;
  bool targets_met = true;
};

template <class T>
T field(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw PreconditionError("probe: field '" + key + "' has the wrong type");
  }
}

template <class T>
T field(const Json& j, const std::string& key) {
  require(j.contains(key), "probe: missing field '" + key + "'");
  return field<T>(j, key, T{});
}

Json lattice_json(const TruncatedLattice& lat) {
  return {{"dim", lat.dim()}, {"K", lat.coarse_scale()}, {"L", lat.depth()}};
}

const std::vector<std::string> kDecayKeys{"name", "p", "k_grid", "h_grid", "batch", "tail_tolerance", "modulus_fraction"};

DecayOptions decay_options(const Json& j, std::uint64_t seed) {
  DecayOptions o;
  o.k_grid = field(j, "k_grid", o.k_grid);
  o.h_grid = field(j, "h_grid", o.h_grid);
  o.batch.batch = field<std::size_t>(j, "batch", o.batch.batch);
  o.batch.seed = seed;
  o.tail_tolerance = field(j, "tail_tolerance", o.tail_tolerance);
  o.modulus_fraction = field(j, "modulus_fraction", o.modulus_fraction);
  return o;
}

FkrtOptions fkrt_options(const Json& j) {
  FkrtOptions o;
  o.threshold_b = field(j, "threshold_b", o.threshold_b);
  o.threshold_c = field(j, "threshold_c", o.threshold_c);
  return o;
}

const OperatorConfig& need_kind(const std::optional<OperatorConfig>& op, const std::string& kind,
                                const std::string& probe) {
  require(op.has_value(), "probe " + probe + " needs an operator");
  require(op->kind == kind, "probe " + probe + " needs a " + kind + " operator");
  return *op;
}

CsvTable fkrt_csv(const FkrtReport& r) {
  CsvTable t;
  t.comments = {"tail: at = A, value = sup over the family of (int_{|x|>A} |F|^p)^(1/p)",
                "shift: at = t, value = sup over the family of ||F(. + t) - F||_p"};
  t.header = {"series", "at", "value"};
  for (const auto& p : r.tail_profile) {
    t.labels.push_back("tail");
    t.rows.push_back({p.at, p.value});
  }
  for (const auto& p : r.shift_profile) {
    t.labels.push_back("shift");
    t.rows.push_back({p.at, p.value});
  }
  return t;
}

void add_fit(CsvTable& t, const std::string& series, const DecayFit& fit) {
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    t.labels.push_back(series);
    t.rows.push_back({fit.x[i], fit.value[i]});
  }
}

Point point_from_json(const Json& j, int dim) {
  require(j.is_array() && static_cast<int>(j.size()) == dim, "point needs one coordinate per axis");
  Point p{Rational{0}, Rational{0}};
  for (int a = 0; a < dim; ++a) {
    const auto& c = j[static_cast<std::size_t>(a)];
    require(c.is_array() && c.size() == 2, "coordinates are [numerator, denominator]");
    const auto num = c[0].get<std::int64_t>(), den = c[1].get<std::int64_t>();
    require(den > 0, "coordinate denominator must be positive");
    p[static_cast<std::size_t>(a)] = Rational{num, den};
  }
  return p;
}

Outcome run_probe(const Json& pj, const std::optional<OperatorConfig>& op, const TruncatedLattice& lat,
                  std::uint64_t seed) {
  require(pj.is_object(), "probe must be a JSON object");
  const auto name = field<std::string>(pj, "name");
  Outcome out;
  if (name == "fkrt") {
    check_keys(pj, {"name", "family", "p", "A_grid", "t_grid", "threshold_b", "threshold_c", "expect_fails_b",
                    "expect_fails_c"},
               "probe fkrt");
    require(pj.contains("family") && pj.at("family").is_array(), "probe fkrt: family must be an array of inputs");
    std::vector<StepFunction> fam;
    for (const auto& f : pj.at("family")) fam.push_back(input_from_json(f, lat));
    const auto r = fkrt_probe(fam, field<double>(pj, "p"), field(pj, "A_grid", default_A_grid(lat)),
                              field(pj, "t_grid", default_t_grid(lat)), fkrt_options(pj));
    out.report = to_json(r);
    out.csv = fkrt_csv(r);
    if (pj.contains("expect_fails_b")) out.targets_met &= r.fails_b == field<bool>(pj, "expect_fails_b");
    if (pj.contains("expect_fails_c")) out.targets_met &= r.fails_c == field<bool>(pj, "expect_fails_c");
  } else if (name == "noncompact-T") {
    check_keys(pj, {"name", "p", "A", "threshold_b", "threshold_c"}, "probe noncompact-T");
    const auto& T = need_kind(op, "T", name);
    const auto r = noncompact_T_probe(T.eps, T.alpha, Exponents(field<std::vector<double>>(pj, "p")), lat,
                                      field(pj, "A", 1.0), fkrt_options(pj));
    out.report = to_json(r);
    out.csv = fkrt_csv(r.fkrt);
    out.targets_met = r.fkrt.fails_b || r.fkrt.fails_c;
  } else if (name == "noncompact-shift") {
    check_keys(pj, {"name", "p", "threshold_b", "threshold_c"}, "probe noncompact-shift");
    const auto& S = need_kind(op, "shift", name);
    const auto r = noncompact_shift_probe(S.shift, field<double>(pj, "p"), lat, fkrt_options(pj));
    out.report = to_json(r);
    out.csv = fkrt_csv(r.fkrt);
    out.targets_met = r.fkrt.fails_b || r.fkrt.fails_c;
  } else if (name == "pi-compactness") {
    check_keys(pj, kDecayKeys, "probe pi-compactness");
    const auto& P = need_kind(op, "pi", name);
    const auto r = pi_compactness_probe(P.b[0], P.alpha, Exponents(field<std::vector<double>>(pj, "p")), lat,
                                        decay_options(pj, seed));
    out.report = to_json(r);
    out.csv.comments = {"tail: x = k, value = sup over the batch of int_{|x|>=2^k} |pi(f)|^p",
                        "modulus: x = log2 h, value = sup over the batch of ||pi(f)(. + h) - pi(f)||_p"};
    out.csv.header = {"series", "x", "value"};
    add_fit(out.csv, "tail", r.tail);
    add_fit(out.csv, "modulus", r.modulus);
    out.targets_met = r.tail.passed() && r.modulus.passed();
  } else if (name == "remark31") {
    check_keys(pj, {"name", "alpha", "p", "k0_grid", "t_multipliers", "c"}, "probe remark31");
    const auto r = remark31_probe(field<std::vector<int>>(pj, "k0_grid"),
                                  AlphaVector(field<std::vector<int>>(pj, "alpha")),
                                  Exponents(field<std::vector<double>>(pj, "p")), lat,
                                  field(pj, "t_multipliers", std::vector<double>{}), field(pj, "c", 0.1));
    out.report = to_json(r);
    out.csv.comments = {"raw: max over t of ||pi(f)(. + t) - pi(f)||_p with the unnormalized input",
                        "normalized: same with every input scaled to unit L^{p_j} norm"};
    out.csv.header = {"k0", "raw", "raw_t", "normalized", "normalized_t"};
    for (const auto& row : r.rows) out.csv.rows.push_back({double(row.k0), row.raw, row.raw_t, row.normalized, row.normalized_t});
    out.targets_met = r.raw_stays_above;
  } else if (name == "commutator-compactness") {
    check_keys(pj, kDecayKeys, "probe commutator-compactness");
    const auto& C = need_kind(op, "commutator", name);
    require(C.inner->kind == "T" && !C.inner->tops, "probe commutator-compactness needs [b, T] with T without tops");
    const auto r = commutator_compactness_probe(C.b[0], C.inner->eps, C.inner->alpha, C.slot,
                                                Exponents(field<std::vector<double>>(pj, "p")), lat,
                                                decay_options(pj, seed));
    out.report = to_json(r);
    out.csv.comments = {"tail: x = k, value = sup over the batch of int_{|x|>=2^k} |[b,T]_i(f)|^p",
                        "modulus: x = log2 h, value = sup over the batch of ||C(. + h) - C||_p"};
    out.csv.header = {"series", "x", "value"};
    add_fit(out.csv, "tail", r.tail);
    add_fit(out.csv, "modulus", r.modulus);
    out.targets_met = r.tail.passed() && r.modulus.passed() && r.split_error <= 1e-10;
  } else if (name == "shift-commutator") {
    check_keys(pj, kDecayKeys, "probe shift-commutator");
    const auto& C = need_kind(op, "commutator", name);
    require(C.inner->kind == "shift", "probe shift-commutator needs [b, S]");
    const auto r = shift_commutator_probe(C.b[0], C.inner->shift, field<double>(pj, "p"), lat, decay_options(pj, seed));
    out.report = to_json(r);
    out.csv.comments = {"tail: x = k, value = sup over the batch of int_{E_k} |[b,S]f|^p, "
                        "E_k = [0,inf)^d minus [0,2^k)^d"};
    out.csv.header = {"series", "x", "value"};
    add_fit(out.csv, "tail", r.tail);
    out.targets_met = r.tail.passed() && r.split_error <= 1e-10 && std::isfinite(r.mds_ratio);
  } else if (name == "continuity") {
    check_keys(pj, {"name", "f", "lipschitz", "k0_grid", "points", "delta_grid"}, "probe continuity");
    const auto& S = need_kind(op, "shift", name);
    require(pj.contains("f") && pj.contains("points"), "probe continuity needs f and points");
    std::vector<Point> pts;
    for (const auto& p : pj.at("points")) pts.push_back(point_from_json(p, lat.dim()));
    const auto r = continuity_probe(S.shift, input_from_json(pj.at("f"), lat), field<double>(pj, "lipschitz"), lat,
                                    field<std::vector<int>>(pj, "k0_grid"), pts,
                                    field(pj, "delta_grid", std::vector<double>{0.5, 0.25, 0.125, 0.0625}));
    out.report = to_json(r);
    out.csv.comments = {"measured = |F(x + t)| + |F(x)| for F the part of Sf with l(I) <= 2^-k0",
                        "bound = 2^(1-m) sqrt(d) Lip(f) sum of l(I) over those scales"};
    out.csv.header = {"point", "k0", "measured", "bound", "margin"};
    for (const auto& row : r.rows)
      out.csv.rows.push_back({double(row.point), double(row.k0), row.measured, row.bound, row.margin});
    out.targets_met = r.min_margin >= 0.0 && r.oscillation_nonincreasing;
  } else if (name == "opnorm") {
    check_keys(pj, {"name", "p", "budget"}, "probe opnorm");
    require(op.has_value(), "probe opnorm needs an operator");
    const std::size_t budget = field<std::size_t>(pj, "budget", 256);
    const double v = opnorm_lower_bound(op->handle(), Exponents(field<std::vector<double>>(pj, "p")), lat, budget, seed);
    out.report = {{"lower_bound", v}, {"budget", budget}};
    out.csv.comments = {"lower bound for the operator norm from L^p1 x ... x L^pm to L^p"};
    out.csv.header = {"budget", "lower_bound"};
    out.csv.rows.push_back({double(budget), v});
  } else if (name == "weighted-ratio") {
    check_keys(pj, {"name", "weights", "p", "batch", "t_grid"}, "probe weighted-ratio");
    const auto& I = need_kind(op, "iterated", name);
    require(pj.contains("weights") && pj.at("weights").is_array(), "probe weighted-ratio: weights must be an array");
    WeightVector w;
    for (const auto& wj : pj.at("weights")) w.w.push_back(input_from_json(wj, lat));
    BatchOptions b;
    b.batch = field<std::size_t>(pj, "batch", b.batch);
    b.seed = seed;
    const auto r = weighted_ratio_probe(I.b, I.eps, I.alpha, w, Exponents(field<std::vector<double>>(pj, "p")), lat, b,
                                        field(pj, "t_grid", std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0}));
    out.report = to_json(r);
    out.csv.comments = {"ratio = ||T(f)||_{L^p(nu)} / (prod ||b_j||_BMO prod ||f_j||_{L^{p_j}(w_j)}), batch order"};
    out.csv.header = {"index", "ratio"};
    for (std::size_t i = 0; i < r.ratios.size(); ++i) out.csv.rows.push_back({double(i), r.ratios[i]});
  } else {
    throw PreconditionError("unknown probe '" + name + "'");
  }
  return out;
}

Json read_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw PreconditionError(std::string("malformed config: ") + e.what());
  }
}

void write_outputs(const std::string& dir, const std::string& stem, const Json& report, const CsvTable& csv) {
  std::filesystem::create_directories(dir);
  std::ofstream(std::filesystem::path(dir) / (stem + ".json")) << canonical_dump(report);
  std::ofstream c(std::filesystem::path(dir) / (stem + ".csv"));
  write_csv(c, csv);
}

int cmd_apply(const Json& cfg, std::uint64_t seed, const std::string& dir) {
  check_keys(cfg, {"lattice", "seed", "operator", "inputs", "lp"}, "config");
  require(cfg.contains("lattice") && cfg.contains("operator") && cfg.contains("inputs"),
          "apply needs lattice, operator and inputs");
  const auto lat = lattice_from_json(cfg.at("lattice"));
  const auto op = operator_from_json(cfg.at("operator"), lat);
  require(cfg.at("inputs").is_array(), "inputs must be an array");
  std::vector<StepFunction> f;
  for (const auto& j : cfg.at("inputs")) f.push_back(input_from_json(j, lat));
  const StepFunction out = op.handle()->apply(f, lat).canonical();
  Json norms = Json::object();
  for (double p : cfg.value("lp", std::vector<double>{1.0, 2.0})) {
    std::ostringstream key;
    key << p;
    norms[key.str()] = lp_norm(out, p);
    std::cout << "||output||_" << key.str() << " = " << lp_norm(out, p) << "\n";
  }
  std::filesystem::create_directories(dir);
  std::ofstream(std::filesystem::path(dir) / "output.json") << canonical_dump(to_json(out));
  write_outputs(dir, "apply", {{"command", "apply"}, {"seed", seed}, {"lattice", lattice_json(lat)},
                               {"kind", op.kind}, {"lp_norms", norms}},
                step_function_csv(out, "operator output"));
  std::filesystem::rename(std::filesystem::path(dir) / "apply.csv", std::filesystem::path(dir) / "output.csv");
  return 0;
}

int cmd_probe(const Json& cfg, std::uint64_t seed, const std::string& dir) {
  check_keys(cfg, {"lattice", "seed", "operator", "probe"}, "config");
  require(cfg.contains("lattice") && cfg.contains("probe"), "probe needs lattice and probe");
  const auto lat = lattice_from_json(cfg.at("lattice"));
  std::optional<OperatorConfig> op;
  if (cfg.contains("operator")) op = operator_from_json(cfg.at("operator"), lat);
  const auto out = run_probe(cfg.at("probe"), op, lat, seed);
  const auto name = cfg.at("probe").at("name").get<std::string>();
  const Json report{{"command", "probe"},
                    {"probe", name},
                    {"seed", seed},
                    {"lattice", lattice_json(lat)},
                    {"report", out.report},
                    {"targets_met", out.targets_met}};
  write_outputs(dir, name, report, out.csv);
  std::cout << name << ": targets " << (out.targets_met ? "met" : "missed") << "\n";
  return out.targets_met ? 0 : 1;
}

int cmd_norms(const Json& cfg, std::uint64_t seed, const std::string& dir) {
  check_keys(cfg, {"lattice", "seed", "b", "r", "weights", "p", "cmo_refine"}, "config");
  require(cfg.contains("lattice"), "norms needs lattice");
  const auto lat = lattice_from_json(cfg.at("lattice"));
  Json rep{{"command", "norms"}, {"seed", seed}, {"lattice", lattice_json(lat)}};
  CsvTable csv;
  csv.comments = {"per-scale maximum of (1/|I|) int_I |b - <b>_I| over dyadic I of length 2^scale"};
  csv.header = {"scale", "mean_oscillation"};
  if (cfg.contains("b")) {
    const StepFunction b = input_from_json(cfg.at("b"), lat);
    const auto bmo = bmo_dyadic(b, lat);
    rep["bmo_dyadic"] = to_json(bmo);
    for (const auto& e : bmo.profile) csv.rows.push_back({double(e.scale), e.value});
    Json r = Json::object();
    for (double rv : cfg.value("r", std::vector<double>{2.0})) {
      std::ostringstream key;
      key << rv;
      r[key.str()] = to_json(bmo_r(b, rv, lat));
    }
    rep["bmo_r"] = r;
    if (lat.dim() == 1) {
      if (b.k_min() >= lat.finest_scale() - 1) rep["bmo2_dyadic"] = to_json(bmo2_dyadic(b, lat));
      rep["bmo_shifted_lower_bound"] = to_json(bmo_shifted_lower_bound(b, lat));
    }
    rep["cmo_distance"] = to_json(cmo_distance(b, lat, cfg.value("cmo_refine", 3)));
    std::cout << "bmo_dyadic = " << bmo.value << "\n";
  }
  if (cfg.contains("weights")) {
    require(cfg.at("weights").is_array() && cfg.contains("p"), "weights need an array and p");
    WeightVector w;
    for (const auto& wj : cfg.at("weights")) w.w.push_back(input_from_json(wj, lat));
    const auto ap = ap_constant(w, Exponents(cfg.at("p").get<std::vector<double>>()), lat);
    rep["ap_constant"] = to_json(ap);
    std::cout << "ap_constant = " << ap.standard << " (verbatim " << ap.verbatim << ")\n";
  }
  write_outputs(dir, "norms", rep, csv);
  return 0;
}

void list_generators() {
  for (const auto& g : generators()) std::cout << g.name << "\n  fields: " << g.fields << "\n  " << g.description << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic operators on truncated lattices: apply, probe, norms"};
  app.require_subcommand(1);
  std::string config, out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (default: DYADLAB_THREADS or 1)");
  };
  auto* apply = app.add_subcommand("apply", "apply an operator to inputs");
  auto* probe = app.add_subcommand("probe", "run one probe");
  auto* norms = app.add_subcommand("norms", "BMO-type norms of b and A_P constants of weights");
  auto* list = app.add_subcommand("list-generators", "list the named input generators");
  add_common(apply);
  add_common(probe);
  add_common(norms);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (list->parsed()) {
      list_generators();
      return 0;
    }
    if (threads > 0) set_threads(threads);
    const Json cfg = read_config(config);
    require(cfg.is_object(), "config must be a JSON object");
    std::uint64_t s = 0;
    if (cfg.contains("seed")) {
      require(cfg.at("seed").is_number_unsigned() || cfg.at("seed").is_number_integer(), "seed must be an integer");
      s = cfg.at("seed").get<std::uint64_t>();
    }
    if (seed) s = *seed;
    if (apply->parsed()) return cmd_apply(cfg, s, out_dir);
    if (probe->parsed()) return cmd_probe(cfg, s, out_dir);
    return cmd_norms(cfg, s, out_dir);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
