#include "superloc/scenario_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "superloc/morse.hpp"

namespace superloc {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& msg) { throw ParseError(key, msg); }

const ojson& require(const ojson& j, const std::string& field, const std::string& key) {
  if (!j.contains(field)) bad(key, "missing");
  return j.at(field);
}

void only_keys(const ojson& j, const std::string& prefix, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(prefix, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) bad(prefix.empty() ? k : prefix + "." + k, "unknown key");
  }
}

int get_int(const ojson& j, const std::string& key, int lo, int hi) {
  if (!j.is_number_integer()) bad(key, "expected an integer");
  const long long v = j.get<long long>();
  if (v < lo || v > hi) bad(key, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double get_positive(const ojson& j, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) bad(key, "expected a positive number");
  return v;
}

std::string get_string(const ojson& j, const std::string& key) {
  if (!j.is_string()) bad(key, "expected a string");
  return j.get<std::string>();
}

// integers, decimals or strings such as "1/2"; exact when the text is
Number get_exact(const ojson& j, const std::string& key) {
  std::string text;
  if (j.is_number()) text = j.dump();
  else if (j.is_string()) text = j.get<std::string>();
  else bad(key, "expected a number");
  try {
    ScalarExpr e = parse_scalar(text, CoordinateNames{});
    if (!e.is_constant()) bad(key, "expected a constant");
    return e.constant_term();
  } catch (const ParseError& e) {
    bad(key, e.what());
  }
}

SuperFunction get_expr(const ojson& j, const std::string& key, const CoordinateNames& names) {
  const std::string text = get_string(j, key);
  try {
    return parse_expression(text, names);
  } catch (const ParseError& e) {
    bad(key, e.what());
  }
}

std::vector<std::string> get_names(const ojson& j, const std::string& key) {
  if (!j.is_array()) bad(key, "expected an array of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_string(j[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

void parse_dims_and_names(const ojson& j, Scenario& sc) {
  const ojson& dims = require(j, "dims", "dims");
  only_keys(dims, "dims", {"m", "n"});
  sc.m = get_int(require(dims, "m", "dims.m"), "dims.m", 0, 16);
  sc.n = get_int(require(dims, "n", "dims.n"), "dims.n", 0, 24);
  sc.names = CoordinateNames::defaults(sc.m, sc.n);
  if (!j.contains("coordinates")) return;
  const ojson& c = j.at("coordinates");
  only_keys(c, "coordinates", {"even", "odd"});
  if (c.contains("even")) sc.names.even = get_names(c.at("even"), "coordinates.even");
  if (c.contains("odd")) sc.names.odd = get_names(c.at("odd"), "coordinates.odd");
  if (static_cast<int>(sc.names.even.size()) != sc.m) bad("coordinates.even", "expected dims.m names");
  if (static_cast<int>(sc.names.odd.size()) != sc.n) bad("coordinates.odd", "expected dims.n names");
  std::set<std::string> seen;
  for (const auto* list : {&sc.names.even, &sc.names.odd})
    for (const auto& name : *list) {
      const std::string key = list == &sc.names.even ? "coordinates.even" : "coordinates.odd";
      if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
        bad(key, "invalid name '" + name + "'");
      for (char ch : name)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) bad(key, "invalid name '" + name + "'");
      if (is_reserved_name(name)) bad(key, "reserved name '" + name + "'");
      if (!seen.insert(name).second) bad(key, "duplicate name '" + name + "'");
    }
}

// coordinate name -> (odd, index)
std::pair<bool, int> lookup(const CoordinateNames& names, const std::string& name, const std::string& key) {
  const int e = names.even_index(name);
  if (e >= 0) return {false, e};
  const int o = names.odd_index(name);
  if (o >= 0) return {true, o};
  bad(key, "unknown coordinate '" + name + "'");
}

void parse_entry(const std::string& k, const ojson& v, Scenario& sc) {
  const CoordinateNames& names = sc.names;
  if (k == "id" || k == "dims" || k == "coordinates") return;
  if (k == "Q") {
    if (!v.is_object()) bad("Q", "expected an object mapping coordinates to expressions");
    sc.q = SuperVectorField(sc.m, sc.n);
    for (const auto& [name, expr] : v.items()) {
      const auto [odd, idx] = lookup(names, name, "Q." + name);
      (odd ? sc.q.odd[idx] : sc.q.even[idx]) = get_expr(expr, "Q." + name, names);
    }
  } else if (k == "mu") {
    only_keys(v, "mu", {"coefficient", "orientation"});
    sc.mu = {sc.m, sc.n, get_expr(require(v, "coefficient", "mu.coefficient"), "mu.coefficient", names), 1};
    if (v.contains("orientation")) {
      const int o = get_int(v.at("orientation"), "mu.orientation", -1, 1);
      if (o == 0) bad("mu.orientation", "expected +1 or -1");
      sc.mu.orientation = o;
    }
  } else if (k == "rotation_action") {
    if (!v.is_array()) bad(k, "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string key = k + "[" + std::to_string(i) + "]";
      only_keys(v[i], key, {"plane", "weight"});
      const auto plane = get_names(require(v[i], "plane", key + ".plane"), key + ".plane");
      if (plane.size() != 2) bad(key + ".plane", "expected two coordinates");
      const auto a = lookup(names, plane[0], key + ".plane");
      const auto b = lookup(names, plane[1], key + ".plane");
      if (a.first != b.first || a.second == b.second)
        bad(key + ".plane", "needs two distinct coordinates of the same parity");
      RotationPlane p{a.first, a.second, b.second, Number(1)};
      if (v[i].contains("weight")) p.weight = get_exact(v[i].at("weight"), key + ".weight");
      sc.rotation.push_back(p);
    }
  } else if (k == "N") {
    only_keys(v, "N", {"normal_even", "normal_odd"});
    CoordinateSubmanifold sub{sc.m, sc.n, {}, {}};
    for (const char* part : {"normal_even", "normal_odd"}) {
      if (!v.contains(part)) continue;
      const std::string key = std::string("N.") + part;
      const bool want_odd = std::string(part) == "normal_odd";
      for (const auto& name : get_names(v.at(part), key)) {
        const auto [odd, idx] = lookup(names, name, key);
        if (odd != want_odd) bad(key, "coordinate '" + name + "' has the wrong parity");
        (odd ? sub.normal_odd : sub.normal_even).push_back(idx);
      }
    }
    try {
      sub.validate();
    } catch (const std::exception& e) {
      bad("N", e.what());
    }
    sc.locus = sub;
  } else if (k == "sigma") {
    sc.sigma = get_expr(v, "sigma", names);
  } else if (k == "S") {
    sc.phase = get_expr(v, "S", names);
  } else if (k == "cutoff") {
    only_keys(v, "cutoff", {"r", "R"});
    const Number r = get_exact(require(v, "r", "cutoff.r"), "cutoff.r");
    const Number big = get_exact(require(v, "R", "cutoff.R"), "cutoff.R");
    if (!r.is_exact() || !big.is_exact()) bad("cutoff", "radii must be exact");
    sc.cutoff = std::make_pair(r.exact(), big.exact());
  } else if (k == "lambda_grid") {
    if (!v.is_array()) bad(k, "expected an array");
    sc.lambda_grid.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string key = k + "[" + std::to_string(i) + "]";
      if (!v[i].is_number() || v[i].get<double>() < 0.0) bad(key, "expected a nonnegative number");
      sc.lambda_grid.push_back(v[i].get<double>());
    }
  } else if (k == "quadrature") {
    only_keys(v, "quadrature", {"kind", "box", "points", "tol"});
    if (v.contains("kind")) {
      const std::string kind = get_string(v.at("kind"), "quadrature.kind");
      if (kind == "auto") sc.quadrature.kind = QuadratureConfig::Kind::Auto;
      else if (kind == "gauss_hermite") sc.quadrature.kind = QuadratureConfig::Kind::GaussHermite;
      else if (kind == "box") sc.quadrature.kind = QuadratureConfig::Kind::Box;
      else bad("quadrature.kind", "expected auto, gauss_hermite or box");
    }
    if (v.contains("box")) {
      const ojson& box = v.at("box");
      if (!box.is_array() || static_cast<int>(box.size()) != sc.m) bad("quadrature.box", "expected dims.m intervals");
      sc.quadrature.box.clear();
      for (std::size_t i = 0; i < box.size(); ++i) {
        const std::string key = "quadrature.box[" + std::to_string(i) + "]";
        if (!box[i].is_array() || box[i].size() != 2 || !box[i][0].is_number() || !box[i][1].is_number())
          bad(key, "expected [lo, hi]");
        const double lo = box[i][0].get<double>(), hi = box[i][1].get<double>();
        if (!(lo < hi)) bad(key, "expected lo < hi");
        sc.quadrature.box.emplace_back(lo, hi);
      }
    }
    if (v.contains("points")) sc.quadrature.points = get_int(v.at("points"), "quadrature.points", 1, 200);
    if (v.contains("tol")) sc.quadrature.tol = get_positive(v.at("tol"), "quadrature.tol");
  } else if (k == "tolerances") {
    only_keys(v, "tolerances", {"localization", "constancy", "identity", "cutoff"});
    if (v.contains("localization")) sc.tol.localization = get_positive(v.at("localization"), "tolerances.localization");
    if (v.contains("constancy")) sc.tol.constancy = get_positive(v.at("constancy"), "tolerances.constancy");
    if (v.contains("identity")) sc.tol.identity = get_positive(v.at("identity"), "tolerances.identity");
    if (v.contains("cutoff")) sc.tol.cutoff = get_positive(v.at("cutoff"), "tolerances.cutoff");
  } else {
    bad(k, "unknown key");
  }
}

std::vector<ojson> scenario_objects(const ojson& doc) {
  if (doc.is_array()) return {doc.begin(), doc.end()};
  if (doc.is_object() && doc.contains("scenarios") && doc.size() == 1) {
    if (!doc.at("scenarios").is_array()) bad("scenarios", "expected an array");
    return {doc.at("scenarios").begin(), doc.at("scenarios").end()};
  }
  return {doc};
}

nlohmann::json complex_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

std::string lambda_label(double lambda) {
  std::ostringstream os;
  os << lambda;
  return os.str();
}

// integral of mu exp(i lambda S)
Complex oscillatory(const Density& mu, const SuperFunction& s, double lambda, const QuadratureConfig& config) {
  Density d = mu;
  if (lambda != 0.0) d.coefficient = mu.coefficient * exp_even(scale(s, Number(Complex(0.0, lambda))));
  return berezin_integrate(d, config);
}

void add_identity(ScenarioRecord& rec, const IdentityCheck& c) {
  rec.rows.push_back({c.key, c.holds, nullptr, c.residual, c.holds});
}

void add_error(ScenarioRecord& rec, const std::string& where, const std::string& what) {
  rec.rows.push_back({"error." + where, what, nullptr, std::nullopt, false});
}

void run_verify(const Scenario& sc, const RunOptions& options, ScenarioRecord& rec) {
  const LocalizationReport rep = verify_scenario(sc, {options.exact_only, true});
  if (rep.direct) {
    ReportRow row{"direct_integral", complex_json(*rep.direct), nullptr, std::nullopt, std::nullopt};
    if (rep.localization) {
      row.reference = complex_json(rep.localization->value);
      row.residual = std::abs(*rep.direct - rep.localization->value);
    }
    rec.rows.push_back(row);
  }
  if (rep.localization) {
    rec.rows.push_back({"localization.l", rep.localization->l, nullptr, std::nullopt, std::nullopt});
    rec.rows.push_back({"localization.o", rep.localization->o, nullptr, std::nullopt, std::nullopt});
    rec.rows.push_back({"localization.ber_L", format_super(rep.localization->ber_l, sc.names), nullptr, std::nullopt,
                        std::nullopt});
    if (!options.exact_only)
      rec.rows.push_back({"localization_rhs", complex_json(rep.localization->value), nullptr, std::nullopt, std::nullopt});
  }
  rec.rows.push_back({"sigma", format_super(rep.sigma, sc.names), nullptr, std::nullopt, std::nullopt});
  rec.rows.push_back({"Q_sigma", format_super(rep.q_sigma, sc.names), nullptr, std::nullopt, std::nullopt});
  for (const auto& s : rep.samples) {
    const std::string label = lambda_label(s.lambda);
    ReportRow row{"Z[lambda=" + label + "]", complex_json(s.z), nullptr, std::nullopt, std::nullopt};
    if (rep.direct) {
      row.reference = complex_json(*rep.direct);
      row.residual = std::abs(s.z - *rep.direct);
    }
    rec.rows.push_back(row);
    if (s.leading)
      rec.rows.push_back({"spa_leading[lambda=" + label + "]", complex_json(*s.leading), complex_json(s.z),
                          std::abs(*s.leading - s.z), std::nullopt});
  }
  if (rep.cutoff_integral)
    rec.rows.push_back({"cutoff_integral", complex_json(*rep.cutoff_integral),
                        rep.direct ? complex_json(*rep.direct) : nlohmann::json(nullptr),
                        rep.direct ? std::optional<double>(std::abs(*rep.cutoff_integral - *rep.direct)) : std::nullopt,
                        std::nullopt});
  for (const auto& c : rep.identities) add_identity(rec, c);
  for (const auto& e : rep.errors) {
    const auto colon = e.find(':');
    add_error(rec, e.substr(0, colon), colon == std::string::npos ? e : e.substr(colon + 2));
  }
  rec.pass = rep.pass;
}

struct PhaseSetup {
  SuperFunction s;
  CoordinateSubmanifold sub;
};

PhaseSetup phase_setup(const Scenario& sc) {
  if (sc.phase) {
    if (!sc.locus) throw std::invalid_argument("an explicit phase S needs its critical submanifold N");
    return {*sc.phase, *sc.locus};
  }
  const SuperFunction sigma = build_sigma(sc);
  return {apply_vf(sc.q, sigma), resolve_locus(sc)};
}

void run_spa(const Scenario& sc, const RunOptions& options, ScenarioRecord& rec) {
  if (options.exact_only) {
    add_error(rec, "spa", "stationary phase needs quadrature; not available with --exact");
    return;
  }
  const PhaseSetup ph = phase_setup(sc);
  std::vector<double> lambdas;
  for (double l : options.lambdas.empty() ? sc.lambda_grid : options.lambdas)
    if (l > 0.0) lambdas.push_back(l);
  std::vector<double> remainders;
  double worst_rel = 0.0;
  int k = 0, l = 0;
  for (double lambda : lambdas) {
    const Complex z = oscillatory(sc.mu, ph.s, lambda, sc.quadrature);
    const StationaryPhaseTerm t = stationary_phase_rhs(sc.mu, ph.s, ph.sub, lambda, sc.quadrature);
    k = t.k;
    l = t.l;
    const double r = std::abs(z - t.value);
    remainders.push_back(r);
    worst_rel = std::max(worst_rel, r / std::max(std::abs(z), 1e-300));
    rec.rows.push_back({"Z[lambda=" + lambda_label(lambda) + "]", complex_json(z), complex_json(t.value), r, std::nullopt});
  }
  const double expected = l - k / 2.0 - 1.0;
  const double noise = 1e-10;
  if (worst_rel <= noise) {
    // the leading term is exact here
    rec.rows.push_back({"remainder.max_relative", worst_rel, noise, worst_rel, true});
    rec.pass = true;
    return;
  }
  const auto slope = log_log_slope(lambdas, remainders);
  if (!slope) {
    add_error(rec, "remainder_slope", "need at least two positive lambda values");
    return;
  }
  const bool ok = *slope <= expected + 0.1;
  rec.rows.push_back({"remainder_slope", *slope, expected, *slope - expected, ok});
  rec.pass = ok;
}

void run_morse(const Scenario& sc, const RunOptions&, ScenarioRecord& rec) {
  const PhaseSetup ph = phase_setup(sc);
  const MorseNormalForm nf = normalize_jet(ph.s, ph.sub, sc.n / 2 + 1);
  rec.rows.push_back({"critical_value", format_number(nf.critical_value), nullptr, std::nullopt, std::nullopt});
  std::string signs;
  for (int s : nf.signs) signs += (signs.empty() ? "" : " ") + std::string(s > 0 ? "+1" : "-1");
  rec.rows.push_back({"signs", signs, nullptr, std::nullopt, std::nullopt});
  rec.rows.push_back({"steps", static_cast<int>(nf.change.steps.size()), nullptr, std::nullopt, std::nullopt});
  rec.rows.push_back({"normalized", format_super(nf.normalized, sc.names), format_super(nf.standard, sc.names),
                      std::nullopt, std::nullopt});
  rec.rows.push_back({"odd_residual", format_super(nf.odd_residual, sc.names), "0", max_abs_coefficient(nf.odd_residual),
                      nf.odd_sector_standard});
  rec.rows.push_back({"even_remainder", format_scalar(nf.even_remainder, sc.names), nullptr, std::nullopt, std::nullopt});
  rec.pass = nf.odd_sector_standard;
}

void run_integrate(const Scenario& sc, const RunOptions& options, ScenarioRecord& rec) {
  if (options.exact_only && sc.m > 0) {
    add_error(rec, "integrate", "the even integral needs quadrature; not available with --exact");
    return;
  }
  const QuadratureResult r = berezin_integrate_detailed(sc.mu, sc.quadrature);
  rec.rows.push_back({"direct_integral", complex_json(r.value), nullptr, r.error_estimate, std::nullopt});
  rec.pass = std::isfinite(r.value.real()) && std::isfinite(r.value.imag());
}

std::string cell(const nlohmann::json& v) {
  if (v.is_null()) return "-";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  char buf[64];
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) {
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    const double re = v[0].get<double>(), im = v[1].get<double>();
    if (std::abs(im) <= 1e-12 * std::max(1.0, std::abs(re))) {
      std::snprintf(buf, sizeof buf, "%.12g", re);
    } else {
      std::snprintf(buf, sizeof buf, "%.12g%+.12gi", re, im);
    }
    return buf;
  }
  return v.dump();
}

}  // namespace

Scenario scenario_from_json(const ojson& j) {
  if (!j.is_object()) bad("scenario", "expected an object");
  for (const auto& [k, v] : j.items()) {
    static const std::set<std::string> known = {"id", "dims", "coordinates", "Q", "mu", "rotation_action", "N",
                                                "sigma", "S", "cutoff", "lambda_grid", "quadrature", "tolerances"};
    if (!known.count(k)) bad(k, "unknown key");
  }
  Scenario sc;
  sc.id = get_string(require(j, "id", "id"), "id");
  if (sc.id.empty()) bad("id", "must not be empty");
  sc.quadrature = QuadratureConfig::from_environment();
  parse_dims_and_names(j, sc);
  require(j, "Q", "Q");
  require(j, "mu", "mu");
  for (const auto& [k, v] : j.items()) parse_entry(k, v, sc);
  try {
    validate_scenario(sc);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    bad("Q", e.what());
  }
  return sc;
}

std::vector<Scenario> load_scenarios(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<Scenario> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      for (auto& sc : load_scenarios(f.string())) out.push_back(std::move(sc));
    return out;
  }
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, std::string("invalid JSON: ") + e.what());
  }
  const auto objects = scenario_objects(doc);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    try {
      out.push_back(scenario_from_json(objects[i]));
    } catch (const ParseError& e) {
      const std::string where = objects.size() > 1 || doc.is_array() ? "[" + std::to_string(i) + "]." : "";
      const std::string what = e.what();
      throw ParseError(where + e.key(), e.key().empty() ? what : what.substr(e.key().size() + 2));
    }
  }
  return out;
}

Mode mode_from_string(const std::string& s) {
  if (s == "verify") return Mode::Verify;
  if (s == "spa") return Mode::Spa;
  if (s == "morse") return Mode::Morse;
  if (s == "integrate") return Mode::Integrate;
  throw std::invalid_argument("unknown mode " + s);
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Verify: return "verify";
    case Mode::Spa: return "spa";
    case Mode::Morse: return "morse";
    case Mode::Integrate: return "integrate";
  }
  return "verify";
}

ScenarioRecord run_scenario(const Scenario& input, const RunOptions& options) {
  Scenario sc = input;
  if (options.tol) sc.tol.localization = sc.tol.constancy = sc.tol.cutoff = *options.tol;
  if (!options.lambdas.empty()) sc.lambda_grid = options.lambdas;
  ScenarioRecord rec;
  rec.id = sc.id;
  rec.mode = options.mode;
  try {
    switch (options.mode) {
      case Mode::Verify: run_verify(sc, options, rec); break;
      case Mode::Spa: run_spa(sc, options, rec); break;
      case Mode::Morse: run_morse(sc, options, rec); break;
      case Mode::Integrate: run_integrate(sc, options, rec); break;
    }
  } catch (const std::exception& e) {
    add_error(rec, to_string(options.mode), e.what());
    rec.pass = false;
  }
  return rec;
}

std::string format_text(const std::vector<ScenarioRecord>& records) {
  std::ostringstream os;
  int passed = 0;
  for (const auto& rec : records) {
    passed += rec.pass;
    std::vector<std::array<std::string, 5>> cells = {{"quantity", "value", "reference", "residual", "pass"}};
    for (const auto& r : rec.rows) {
      char buf[32] = "-";
      if (r.residual) std::snprintf(buf, sizeof buf, "%.3e", *r.residual);
      cells.push_back({r.quantity, cell(r.value), cell(r.reference), buf, r.pass ? (*r.pass ? "yes" : "NO") : "-"});
    }
    std::array<std::size_t, 5> width{};
    for (const auto& row : cells)
      for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], std::min<std::size_t>(row[c].size(), 48));
    os << "== " << rec.id << " [" << to_string(rec.mode) << "] " << (rec.pass ? "PASS" : "FAIL") << "\n";
    for (const auto& row : cells) {
      std::string line;
      for (std::size_t c = 0; c < 5; ++c) {
        line += row[c];
        if (c + 1 < 5) line += std::string(width[c] > row[c].size() ? width[c] - row[c].size() + 2 : 2, ' ');
      }
      os << line << "\n";
    }
    os << "\n";
  }
  os << "summary: " << records.size() << " scenarios, " << passed << " passed, " << records.size() - passed
     << " failed\n";
  return os.str();
}

std::string format_json_line(const ScenarioRecord& rec) {
  nlohmann::json j;  // std::map keys: sorted output
  j["id"] = rec.id;
  j["mode"] = to_string(rec.mode);
  j["pass"] = rec.pass;
  for (const auto& r : rec.rows) {
    j[r.quantity] = r.value;
    if (!r.reference.is_null()) j[r.quantity + ".reference"] = r.reference;
    if (r.residual) j[r.quantity + ".residual"] = *r.residual;
    if (r.pass && !r.value.is_boolean()) j[r.quantity + ".pass"] = *r.pass;
  }
  return j.dump();
}

std::optional<double> log_log_slope(const std::vector<double>& lambdas, const std::vector<double>& values) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < std::min(lambdas.size(), values.size()); ++i) {
    if (!(lambdas[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(values[i])) continue;
    const double x = std::log(lambdas[i]), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::nullopt;
  const double den = count * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (count * sxy - sx * sy) / den;
}

}  // namespace superloc
