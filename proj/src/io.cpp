#include "dyadlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "dyadlab/errors.hpp"

namespace dyadlab {
namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map keeps keys sorted
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        dump(e, out, indent + 2);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

Json box_json(const CellBox& b, int dim) {
  if (dim == 1) return {{"lo", {b.lo[0]}}, {"n", {b.n[0]}}};
  return {{"lo", {b.lo[0], b.lo[1]}}, {"n", {b.n[0], b.n[1]}}};
}

Json profile_json(const std::vector<ProfilePoint>& v) {
  Json a = Json::array();
  for (const auto& p : v) a.push_back({{"at", p.at}, {"value", p.value}});
  return a;
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

Json to_json(const StepFunction& f) {
  return {{"dim", f.dim()},
          {"k_min", f.k_min()},
          {"box", box_json(f.box(), f.dim())},
          {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

StepFunction step_function_from_json(const Json& j) {
  require(j.is_object(), "step function must be a JSON object");
  for (const auto& [key, _] : j.items())
    require(key == "dim" || key == "k_min" || key == "box" || key == "values",
            "unknown step function field '" + key + "'");
  require(j.contains("k_min") && j.contains("box") && j.contains("values"),
          "step function needs k_min, box and values");
  const int dim = j.value("dim", 1);
  require(dim == 1 || dim == 2, "step function dimension must be 1 or 2");
  const Json& box = j.at("box");
  require(box.is_object() && box.contains("lo") && box.contains("n") && box.size() == 2,
          "box needs exactly lo and n");
  const auto lo = box.at("lo").get<std::vector<std::int64_t>>();
  const auto n = box.at("n").get<std::vector<std::int64_t>>();
  require(static_cast<int>(lo.size()) == dim && static_cast<int>(n.size()) == dim,
          "box lo and n must have one entry per axis");
  CellBox b;
  b.lo[0] = lo[0];
  b.n[0] = n[0];
  if (dim == 2) {
    b.lo[1] = lo[1];
    b.n[1] = n[1];
  }
  require(b.n[0] >= 0 && b.n[1] >= 0, "box sizes must be nonnegative");
  auto values = j.at("values").get<std::vector<double>>();
  require(values.size() == static_cast<std::size_t>(b.n[0] * b.n[1]), "values do not match the box size");
  return StepFunction(dim, j.at("k_min").get<int>(), b, std::move(values));
}

Json to_json(const DyadicInterval& I) {
  if (I.dim == 1) return {{"k", I.scale}, {"m", {I.index[0]}}};
  return {{"k", I.scale}, {"m", {I.index[0], I.index[1]}}};
}

DyadicInterval interval_from_json(const Json& j, int dim) {
  require(j.is_object() && j.contains("k") && j.contains("m") && j.size() == 2, "interval needs exactly k and m");
  const int k = j.at("k").get<int>();
  const Json& m = j.at("m");
  if (m.is_number_integer()) {
    require(dim == 1, "two-dimensional interval needs m = [mx, my]");
    return DyadicInterval::make1(k, m.get<std::int64_t>());
  }
  const auto v = m.get<std::vector<std::int64_t>>();
  require(static_cast<int>(v.size()) == dim, "interval index must have one entry per axis");
  return dim == 1 ? DyadicInterval::make1(k, v[0]) : DyadicInterval::make2(k, v[0], v[1]);
}

Json to_json(const DecayFit& fit) {
  return {{"x", fit.x},
          {"value", fit.value},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"residual", fit.residual},
          {"points_used", fit.points_used},
          {"target", fit.target},
          {"lower", fit.lower},
          {"upper", fit.upper},
          {"identically_zero", fit.identically_zero},
          {"degenerate", fit.degenerate},
          {"passed", fit.passed()}};
}

Json to_json(const FkrtReport& r) {
  return {{"family_size", r.family_size},
          {"p", r.p},
          {"sup_norm", r.sup_norm},
          {"tail_profile", profile_json(r.tail_profile)},
          {"shift_profile", profile_json(r.shift_profile)},
          {"tail_floor", r.tail_floor},
          {"shift_floor", r.shift_floor},
          {"threshold_b", r.threshold_b},
          {"threshold_c", r.threshold_c},
          {"fails_b", r.fails_b},
          {"fails_c", r.fails_c}};
}

Json to_json(const NoncompactReport& r) {
  Json fam = Json::array();
  for (const auto& I : r.family) fam.push_back(to_json(I));
  return {{"fkrt", to_json(r.fkrt)},
          {"qualifying", r.qualifying},
          {"family", fam},
          {"b_bound", r.b_bound},
          {"c_bound", r.c_bound},
          {"c_bound_computed", r.c_bound_computed},
          {"c_bound_paper", r.c_bound_paper},
          {"outer_sup", r.outer_sup}};
}

Json to_json(const PiProbeReport& r) {
  return {{"tail", to_json(r.tail)}, {"modulus", to_json(r.modulus)}, {"batch_size", r.batch_size}};
}

Json to_json(const CommutatorProbeReport& r) {
  return {{"tail", to_json(r.tail)},
          {"modulus", to_json(r.modulus)},
          {"split_error", r.split_error},
          {"batch_size", r.batch_size}};
}

Json to_json(const ShiftCommutatorReport& r) {
  return {{"tail", to_json(r.tail)},
          {"mds_ratio", r.mds_ratio},
          {"split_error", r.split_error},
          {"batch_size", r.batch_size}};
}

Json to_json(const Remark31Report& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"k0", row.k0},
                    {"raw", row.raw},
                    {"raw_t", row.raw_t},
                    {"normalized", row.normalized},
                    {"normalized_t", row.normalized_t}});
  return {{"rows", rows},
          {"c", r.c},
          {"raw_stays_above", r.raw_stays_above},
          {"normalized_stays_above", r.normalized_stays_above}};
}

Json to_json(const ContinuityReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"point", row.point},
                    {"k0", row.k0},
                    {"measured", row.measured},
                    {"bound", row.bound},
                    {"margin", row.margin}});
  return {{"rows", rows},
          {"oscillation", r.oscillation},
          {"min_margin", r.min_margin},
          {"oscillation_nonincreasing", r.oscillation_nonincreasing}};
}

Json to_json(const WeightedRatioReport& r) {
  return {{"ratios", r.ratios},
          {"max_ratio", r.max_ratio},
          {"median_ratio", r.median_ratio},
          {"skipped", r.skipped},
          {"weak_max_ratio", r.weak_max_ratio},
          {"weak_max_ratio_iterated", r.weak_max_ratio_iterated}};
}

Json to_json(const BmoReport& r) {
  Json prof = Json::array();
  for (const auto& e : r.profile)
    prof.push_back({{"scale", e.scale}, {"value", e.value}, {"maximizer", to_json(e.maximizer)}});
  return {{"value", r.value}, {"maximizer", to_json(r.maximizer)}, {"profile", prof}};
}

Json to_json(const Bmo2Report& r) {
  return {{"verbatim", to_json(r.verbatim)},
          {"standard", to_json(r.standard)},
          {"oscillation", to_json(r.oscillation)}};
}

Json to_json(const ShiftedBmoReport& r) {
  return {{"value", r.value}, {"scale", r.scale}, {"offset_thirds", r.offset_thirds}, {"lo", r.lo}, {"hi", r.hi}};
}

Json to_json(const CmoReport& r) {
  Json w = Json::array();
  for (const auto& [s, v] : r.by_width) w.push_back({{"width_scale", s}, {"distance", v}});
  return {{"distance", r.distance},
          {"best_width_scale", r.best_width_scale},
          {"best_is_zero", r.best_is_zero},
          {"by_width", w}};
}

Json to_json(const ApReport& r) {
  return {{"verbatim", r.verbatim},
          {"standard", r.standard},
          {"verbatim_maximizer", to_json(r.verbatim_maximizer)},
          {"standard_maximizer", to_json(r.standard_maximizer)}};
}

void write_csv(std::ostream& os, const CsvTable& t) {
  for (const auto& c : t.comments) os << "# " << c << "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << "\n";
  char buf[32];
  require(t.labels.empty() || t.labels.size() == t.rows.size(), "one CSV label per row");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (!t.labels.empty()) os << t.labels[r] << (row.empty() ? "" : ",");
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i] == 0.0 ? 0.0 : row[i]);
      os << (i ? "," : "") << buf;
    }
    os << "\n";
  }
}

CsvTable step_function_csv(const StepFunction& f, const std::string& quantity) {
  CsvTable t;
  t.comments.push_back(quantity + " on dyadic cells of length 2^" + std::to_string(f.k_min()));
  const double w = f.cell_width();
  if (f.dim() == 1) {
    t.header = {"x_lo", "x_hi", "value"};
    for (std::int64_t i = 0; i < f.nx(); ++i) {
      const double lo = static_cast<double>(f.box().lo[0] + i) * w;
      t.rows.push_back({lo, lo + w, f.at(i)});
    }
  } else {
    t.header = {"x_lo", "x_hi", "y_lo", "y_hi", "value"};
    for (std::int64_t iy = 0; iy < f.ny(); ++iy)
      for (std::int64_t ix = 0; ix < f.nx(); ++ix) {
        const double x = static_cast<double>(f.box().lo[0] + ix) * w;
        const double y = static_cast<double>(f.box().lo[1] + iy) * w;
        t.rows.push_back({x, x + w, y, y + w, f.at(ix, iy)});
      }
  }
  return t;
}

}  // namespace dyadlab
