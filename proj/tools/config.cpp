#include "config.hpp"

#include <algorithm>
#include <cmath>

#include "dyadlab/errors.hpp"
#include "dyadlab/probes.hpp"

namespace dyadlab::cli {
namespace {

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
  require(j.contains(key), where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw PreconditionError(where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

HaarFunction haar_on(const DyadicInterval& I, const Json& coeffs) {
  if (I.dim == 1) {
    require(coeffs.is_null(), "one-dimensional Haar functions take no coefficients");
    return HaarFunction::standard(I);
  }
  if (coeffs.is_null()) return HaarFunction::with_coeffs(I, {-1.0, 1.0, -1.0, 1.0});
  const auto c = coeffs.get<std::vector<double>>();
  require(c.size() == 4, "two-dimensional Haar functions need 4 child coefficients");
  return HaarFunction::with_coeffs(I, {c[0], c[1], c[2], c[3]});
}

StepFunction sampled(const TruncatedLattice& lat, const std::function<double(double, double)>& g) {
  StepFunction f = StepFunction::on_lattice(lat, lat.finest_scale() - 1);
  const double w = f.cell_width();
  for (std::int64_t iy = 0; iy < f.ny(); ++iy)
    for (std::int64_t ix = 0; ix < f.nx(); ++ix) {
      const double x = (static_cast<double>(f.box().lo[0] + ix) + 0.5) * w;
      const double y = (static_cast<double>(f.box().lo[1] + iy) + 0.5) * w;
      f.at(ix, iy) = g(x, y);
    }
  return f;
}

}  // namespace

void check_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
  require(j.is_object(), where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(),
            where + ": unknown field '" + key + "'");
}

TruncatedLattice lattice_from_json(const Json& j) {
  check_keys(j, {"dim", "K", "L", "top_lo", "top_hi"}, "lattice");
  const int dim = get_or<int>(j, "dim", 1, "lattice");
  const int K = get<int>(j, "K", "lattice"), L = get<int>(j, "L", "lattice");
  require(j.contains("top_lo") == j.contains("top_hi"), "lattice: give both top_lo and top_hi or neither");
  if (j.contains("top_lo"))
    return TruncatedLattice::boxed(dim, K, L, get<std::int64_t>(j, "top_lo", "lattice"),
                                   get<std::int64_t>(j, "top_hi", "lattice"));
  return TruncatedLattice::symmetric(dim, K, L);
}

const std::vector<GeneratorInfo>& generators() {
  static const std::vector<GeneratorInfo> g{
      {"haar", "interval {k, m}, coeffs (2-D only), scale", "Haar function h_I (sup norm 1)"},
      {"indicator", "interval {k, m}, scale", "indicator of a dyadic interval or cube"},
      {"hat", "center, radius, scale", "max(0, 1 - |x - c| / r) (product form in 2-D) at finest-cell midpoints"},
      {"remark31-b", "scale", "alternating indicator symbol accumulating at 1, truncated to the lattice depth"},
      {"remark31-f", "k0, scale", "-2^k0 on [1 - 2^(1-k0), 1 - 2^-k0)"},
      {"noncompact-family", "interval {k, m}, alpha, p, slot, scale",
       "slot-th entry of |I|^(-1/p_j) h_I^(1 + alpha_j)"},
  };
  return g;
}

StepFunction input_from_json(const Json& j, const TruncatedLattice& lat) {
  require(j.is_object(), "input must be a JSON object");
  if (!j.contains("generator")) {
    StepFunction f = step_function_from_json(j);
    require(f.dim() == lat.dim(), "input dimension differs from the lattice");
    return f;
  }
  const auto name = get<std::string>(j, "generator", "input");
  const std::string where = "generator " + name;
  const int d = lat.dim();
  StepFunction f;
  if (name == "haar") {
    check_keys(j, {"generator", "interval", "coeffs", "scale"}, where);
    const auto I = interval_from_json(j.at("interval"), d);
    f = StepFunction::haar(haar_on(I, j.value("coeffs", Json())), I.scale - 1);
  } else if (name == "indicator") {
    check_keys(j, {"generator", "interval", "scale"}, where);
    const auto I = interval_from_json(j.at("interval"), d);
    f = StepFunction::indicator(I, I.scale);
  } else if (name == "hat") {
    check_keys(j, {"generator", "center", "radius", "scale"}, where);
    const double r = get_or<double>(j, "radius", 1.0, where);
    require(r > 0.0, where + ": radius must be positive");
    std::vector<double> c(static_cast<std::size_t>(d), 0.0);
    if (j.contains("center")) {
      if (j.at("center").is_number()) {
        c.assign(static_cast<std::size_t>(d), j.at("center").get<double>());
      } else {
        c = get<std::vector<double>>(j, "center", where);
        require(static_cast<int>(c.size()) == d, where + ": center needs one entry per axis");
      }
    }
    f = sampled(lat, [&](double x, double y) {
      double v = std::max(0.0, 1.0 - std::fabs(x - c[0]) / r);
      if (d == 2) v *= std::max(0.0, 1.0 - std::fabs(y - c[1]) / r);
      return v;
    });
  } else if (name == "remark31-b") {
    check_keys(j, {"generator", "scale"}, where);
    f = remark31_symbol(lat);
  } else if (name == "remark31-f") {
    check_keys(j, {"generator", "k0", "scale"}, where);
    require(d == 1, where + " is one-dimensional");
    f = remark31_input(get<int>(j, "k0", where));
  } else if (name == "noncompact-family") {
    check_keys(j, {"generator", "interval", "alpha", "p", "slot", "scale"}, where);
    require(d == 1, where + " is one-dimensional");
    const AlphaVector alpha(get<std::vector<int>>(j, "alpha", where));
    const Exponents exps(get<std::vector<double>>(j, "p", where));
    require(alpha.size() == exps.size(), where + ": alpha and p must have the same length");
    const int slot = get_or<int>(j, "slot", 1, where);
    require(slot >= 1 && slot <= alpha.size(), where + ": slot out of range");
    f = noncompact_family(interval_from_json(j.at("interval"), 1), alpha, exps)[static_cast<std::size_t>(slot - 1)];
  } else {
    throw PreconditionError("unknown generator '" + name + "'");
  }
  const double s = get_or<double>(j, "scale", 1.0, where);
  if (s != 1.0) f *= s;
  return f;
}

EpsilonSeq eps_from_json(const Json& j, int dim) {
  check_keys(j, {"constant", "right_of", "value", "default", "assign"}, "eps");
  require(j.contains("constant") != j.contains("right_of"), "eps: give exactly one of constant or right_of");
  EpsilonSeq e = j.contains("constant")
                     ? EpsilonSeq::constant(get<double>(j, "constant", "eps"))
                     : EpsilonSeq::supported_right_of(get<double>(j, "right_of", "eps"), get<double>(j, "value", "eps"),
                                                      get_or<double>(j, "default", 0.0, "eps"));
  if (j.contains("constant")) require(!j.contains("value") && !j.contains("default"), "eps: value/default need right_of");
  if (j.contains("assign")) {
    require(j.at("assign").is_array(), "eps: assign must be an array");
    for (const auto& a : j.at("assign")) {
      check_keys(a, {"interval", "value"}, "eps assignment");
      e.assign(interval_from_json(a.at("interval"), dim), get<double>(a, "value", "eps assignment"));
    }
  }
  return e;
}

ShiftSpec shift_from_json(const Json& j, const TruncatedLattice& lat) {
  check_keys(j, {"kind", "m", "n", "terms"}, "shift operator");
  const int m = get<int>(j, "m", "shift operator"), n = get<int>(j, "n", "shift operator");
  if (!j.contains("terms")) return canonical_shift(m, n, lat);
  ShiftSpec spec{lat.dim(), m, n, {}};
  require(j.at("terms").is_array(), "shift operator: terms must be an array");
  for (const auto& t : j.at("terms")) {
    check_keys(t, {"I", "source", "target", "lambda", "source_coeffs", "target_coeffs"}, "shift term");
    const auto I = interval_from_json(t.at("I"), lat.dim());
    const auto src = interval_from_json(t.at("source"), lat.dim());
    const auto dst = interval_from_json(t.at("target"), lat.dim());
    spec.terms.push_back({I, haar_on(src, t.value("source_coeffs", Json())), haar_on(dst, t.value("target_coeffs", Json())),
                          get_or<double>(t, "lambda", 1.0, "shift term")});
  }
  spec.validate();
  return spec;
}

OperatorConfig operator_from_json(const Json& j, const TruncatedLattice& lat) {
  require(j.is_object(), "operator must be a JSON object");
  OperatorConfig c;
  c.kind = get<std::string>(j, "kind", "operator");
  const std::string where = c.kind + " operator";
  if (c.kind == "identity") {
    check_keys(j, {"kind"}, where);
    c.kind = "T";
    c.alpha = AlphaVector({0});
    c.tops = true;
  } else if (c.kind == "T") {
    check_keys(j, {"kind", "eps", "alpha", "tops"}, where);
    c.eps = j.contains("eps") ? eps_from_json(j.at("eps"), 1) : EpsilonSeq::constant(1.0);
    c.alpha = AlphaVector(get<std::vector<int>>(j, "alpha", where));
    c.tops = get_or<bool>(j, "tops", false, where);
  } else if (c.kind == "P") {
    check_keys(j, {"kind", "alpha"}, where);
    c.alpha = AlphaVector(get<std::vector<int>>(j, "alpha", where));
  } else if (c.kind == "pi") {
    check_keys(j, {"kind", "b", "alpha"}, where);
    c.alpha = AlphaVector(get<std::vector<int>>(j, "alpha", where));
    c.b.push_back(input_from_json(j.at("b"), lat));
  } else if (c.kind == "shift") {
    c.shift = shift_from_json(j, lat);
  } else if (c.kind == "commutator") {
    check_keys(j, {"kind", "b", "op", "slot"}, where);
    require(j.contains("b") && j.contains("op"), where + ": needs b and op");
    c.b.push_back(input_from_json(j.at("b"), lat));
    c.inner = std::make_shared<OperatorConfig>(operator_from_json(j.at("op"), lat));
    c.slot = get_or<int>(j, "slot", 1, where);
  } else if (c.kind == "iterated") {
    check_keys(j, {"kind", "b", "eps", "alpha"}, where);
    c.alpha = AlphaVector(get<std::vector<int>>(j, "alpha", where));
    c.eps = j.contains("eps") ? eps_from_json(j.at("eps"), 1) : EpsilonSeq::constant(1.0);
    require(j.contains("b") && j.at("b").is_array(), where + ": b must be an array of inputs");
    for (const auto& bj : j.at("b")) c.b.push_back(input_from_json(bj, lat));
    require(static_cast<int>(c.b.size()) == c.alpha.size(), where + ": one symbol per slot");
  } else {
    throw PreconditionError("unknown operator kind '" + c.kind + "'");
  }
  if (c.kind == "T" || c.kind == "P" || c.kind == "iterated")
    require(!c.alpha.all_ones(), where + ": alpha must not be all ones");
  require(c.dim() == lat.dim(), where + ": dimension differs from the lattice");
  return c;
}

int OperatorConfig::dim() const {
  if (kind == "shift") return shift.dim;
  if (kind == "commutator") return inner->dim();
  return 1;
}

OperatorHandle OperatorConfig::handle() const {
  if (kind == "T") return make_T(eps, alpha, tops);
  if (kind == "P") return make_P(alpha);
  if (kind == "pi") return make_pi(b[0], alpha);
  if (kind == "shift") return make_shift(shift);
  if (kind == "commutator") return make_commutator(b[0], inner->handle(), slot);
  if (kind == "iterated") return make_iterated(b, eps, alpha);
  throw PreconditionError("unknown operator kind '" + kind + "'");
}

}  // namespace dyadlab::cli
