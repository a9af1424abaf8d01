#include "pwb/io.hpp"

#include <fstream>
#include <sstream>

#include "pwb/errors.hpp"

namespace pwb::io {

Json params_record(const SystemParams& p) {
  Json j;
  j["n"] = p.n;
  j["d"] = dec(p.d, p.precision);
  j["alpha"] = dec(p.alpha, p.precision);
  j["precision"] = p.precision;
  if (p.d_exact) j["d_exact"] = p.d_exact->str();
  if (p.alpha_exact) j["alpha_exact"] = p.alpha_exact->str();
  return j;
}

SystemParams params_from(const Json& j) {
  if (!j.contains("n") || !j.contains("d") || !j.contains("alpha"))
    fail(Errc::BadInput, "params record needs n, d, alpha");
  unsigned precision = j.value("precision", 50u);
  return SystemParams::make(j.at("n").get<int>(), j.at("d").get<std::string>(),
                            j.at("alpha").get<std::string>(), precision);
}

Json complex_record(const Complex& z, unsigned digits) {
  Json j;
  j["re"] = dec(z.re, digits);
  j["im"] = dec(z.im, digits);
  return j;
}

static Complex complex_from(const Json& j) {
  return Complex{parse_real(j.at("re").get<std::string>()),
                 parse_real(j.at("im").get<std::string>())};
}

Json spectrum_record(const Spectrum& s) {
  PrecisionGuard guard(s.params.precision);
  Json j;
  j["params"] = params_record(s.params);
  j["k_max"] = s.k_max;
  Json records = Json::array();
  for (const auto& pair : s.pairs) {
    if (s.params.alpha == 0) {
      // One record per chain slot, ordered down the chain.
      for (size_t idx = 0; idx < pair.chain.size(); ++idx) {
        Json r;
        r["j"] = static_cast<int>(idx);
        r["k"] = pair.k;
        r["lambda_re"] = dec(pair.lambda.re);
        r["lambda_im"] = dec(pair.lambda.im);
        Json vec = Json::array();
        for (const auto& z : pair.chain[idx]) vec.push_back(complex_record(z));
        r["V"] = vec;
        r["generalized"] = idx > 0;
        records.push_back(r);
      }
    } else {
      Json r;
      r["j"] = pair.j;
      r["k"] = pair.k;
      r["lambda_re"] = dec(pair.lambda.re);
      r["lambda_im"] = dec(pair.lambda.im);
      Json vec = Json::array();
      for (const auto& z : pair.V) vec.push_back(complex_record(z));
      r["V"] = vec;
      records.push_back(r);
    }
  }
  j["records"] = records;
  Json coll = Json::array();
  for (const auto& c : s.collisions) {
    Json e;
    e["a"] = Json::array({c.first.first, c.first.second});
    e["b"] = Json::array({c.second.first, c.second.second});
    coll.push_back(e);
  }
  j["collisions"] = coll;
  return j;
}

Json verdict_record(const Verdict& v) {
  Json j;
  j["setting"] = setting_name(v.setting);
  j["outcome"] = outcome_name(v.outcome);
  if (v.outcome == Outcome::Resonant) j["resonant_m"] = v.resonant_m;
  if (v.witness) {
    Json w;
    w["kind"] = v.witness->kind;
    w["detail"] = v.witness->detail;
    if (v.witness->mode) w["mode"] = Json::array({v.witness->mode->first, v.witness->mode->second});
    if (v.witness->collision) {
      w["pair_a"] = Json::array({v.witness->collision->first.first, v.witness->collision->first.second});
      w["pair_b"] = Json::array({v.witness->collision->second.first, v.witness->collision->second.second});
    }
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["checked_range"] = v.checked_range;
  j["range_certified"] = v.range_certified;
  j["reason"] = v.reason;
  Json certs = Json::array();
  for (const auto& [k, val] : v.certificates) {
    Json c;
    c["name"] = k;
    c["value"] = val;
    certs.push_back(c);
  }
  j["certificates"] = certs;
  return j;
}

Json gap_record(const GapCertificate& g) {
  Json j;
  j["rho"] = dec(g.rho, 30);
  j["k_start"] = g.k_start;
  Json v = Json::array();
  for (const auto& p : g.violations) {
    Json e;
    e["a"] = Json::array({p.first.first, p.first.second});
    e["b"] = Json::array({p.second.first, p.second.second});
    v.push_back(e);
  }
  j["violations"] = v;
  j["real_branch_flagged"] = g.real_branch_flagged;
  if (g.tightest_real_pair) {
    j["tightest_real_pair"] =
        Json::array({g.tightest_real_pair->first.first, g.tightest_real_pair->first.second,
                     g.tightest_real_pair->second.first, g.tightest_real_pair->second.second});
    j["tightest_real_ratio"] = dec(g.tightest_real_ratio, 30);
  }
  return j;
}

Json exponent_family_record(const ExponentFamily& f) {
  PrecisionGuard guard(f.precision);
  Json j;
  j["T"] = dec(f.T);
  j["precision"] = f.precision;
  Json ex = Json::array();
  for (size_t i = 0; i < f.exponents.size(); ++i) {
    Json e = complex_record(f.exponents[i]);
    e["degree"] = f.degrees[i];
    ex.push_back(e);
  }
  j["exponents"] = ex;
  return j;
}

ExponentFamily exponent_family_from(const Json& j, const Real& T, unsigned precision,
                                    unsigned eta) {
  PrecisionGuard guard(precision);
  std::vector<Complex> lambdas;
  std::vector<unsigned> degrees;
  for (const auto& e : j.at("exponents")) {
    lambdas.push_back(complex_from(e));
    degrees.push_back(e.value("degree", eta));
  }
  return ExponentFamily::generalized(std::move(lambdas), std::move(degrees), T, precision);
}

Json biortho_record(const BiorthogonalFamily& b) {
  PrecisionGuard guard(b.family.precision);
  Json j;
  j["family"] = exponent_family_record(b.family);
  Json rows = Json::array();
  for (size_t i = 0; i < b.coeffs.rows(); ++i) {
    Json row = Json::array();
    for (size_t m = 0; m < b.coeffs.cols(); ++m) row.push_back(complex_record(b.coeffs(i, m)));
    rows.push_back(row);
  }
  j["coeffs"] = rows;
  j["residual"] = dec(b.residual, 20);
  j["gram_condition"] = dec(b.gram_condition, 20);
  return j;
}

Json control_record(const ControlSignal& c) {
  Json j;
  j["T"] = dec(c.T);
  j["shift"] = dec(c.shift);
  Json terms = Json::array();
  for (const auto& t : c.terms) {
    Json e;
    e["lambda_re"] = dec(t.lambda.re);
    e["lambda_im"] = dec(t.lambda.im);
    e["degree"] = t.degree;
    e["coeff_re"] = dec(t.coeff.re);
    e["coeff_im"] = dec(t.coeff.im);
    terms.push_back(e);
  }
  j["terms"] = terms;
  j["norm_l2"] = dec(c.norm_l2, 30);
  if (c.samples) {
    Json s = Json::array();
    for (const auto& [t, v] : *c.samples) {
      Json e;
      e["t"] = dec(t, 30);
      e["re"] = dec(v.re, 30);
      e["im"] = dec(v.im, 30);
      s.push_back(e);
    }
    j["samples"] = s;
  }
  return j;
}

ControlSignal control_from(const Json& j) {
  ControlSignal c;
  c.T = parse_real(j.at("T").get<std::string>());
  c.shift = parse_real(j.at("shift").get<std::string>());
  for (const auto& e : j.at("terms")) {
    ControlTerm t;
    t.lambda = Complex{parse_real(e.at("lambda_re").get<std::string>()),
                       parse_real(e.at("lambda_im").get<std::string>())};
    t.degree = e.at("degree").get<unsigned>();
    t.coeff = Complex{parse_real(e.at("coeff_re").get<std::string>()),
                      parse_real(e.at("coeff_im").get<std::string>())};
    c.terms.push_back(t);
  }
  if (j.contains("norm_l2")) c.norm_l2 = parse_real(j.at("norm_l2").get<std::string>());
  if (j.contains("samples")) {
    std::vector<std::pair<Real, Complex>> s;
    for (const auto& e : j.at("samples"))
      s.emplace_back(parse_real(e.at("t").get<std::string>()),
                     Complex{parse_real(e.at("re").get<std::string>()),
                             parse_real(e.at("im").get<std::string>())});
    c.samples = std::move(s);
  }
  return c;
}

Json initial_state_record(const InitialState& y) {
  Json j;
  j["n"] = y.n;
  j["space"] = y.space == InitialState::Space::Hminus1 ? "Hminus1" : "L2";
  Json modes = Json::array();
  for (const auto& [k, v] : y.coeffs) {
    Json m;
    m["k"] = k;
    Json vec = Json::array();
    for (const auto& z : v) vec.push_back(complex_record(z));
    m["v"] = vec;
    modes.push_back(m);
  }
  j["modes"] = modes;
  return j;
}

InitialState initial_state_from(const Json& j) {
  InitialState y;
  y.n = j.at("n").get<int>();
  std::string space = j.value("space", "Hminus1");
  y.space = space == "L2" ? InitialState::Space::L2 : InitialState::Space::Hminus1;
  for (const auto& m : j.at("modes")) {
    CVec v;
    for (const auto& e : m.at("v")) v.push_back(complex_from(e));
    y.coeffs[m.at("k").get<int>()] = std::move(v);
  }
  y.validate();
  return y;
}

Json trajectory_summary(const ModalTrajectory& t) {
  Json j;
  j["terminal_Hm1"] = dec(t.terminal_Hm1, 30);
  j["terminal_L2"] = dec(t.terminal_L2, 30);
  Json per_mode = Json::array();
  for (const auto& [k, path] : t.modes) {
    Json e;
    e["k"] = k;
    Real m{0};
    for (const auto& z : path.back()) m += norm2(z);
    e["terminal_abs"] = dec(sqrt(m), 30);
    per_mode.push_back(e);
  }
  j["modes"] = per_mode;
  return j;
}

std::string trajectory_table(const ModalTrajectory& t, unsigned digits) {
  std::ostringstream os;
  os << "t\tk\tcomponent\tre\tim\n";
  for (size_t ti = 0; ti < t.t_grid.size(); ++ti)
    for (const auto& [k, path] : t.modes)
      for (size_t c = 0; c < path[ti].size(); ++c)
        os << dec(t.t_grid[ti], digits) << "\t" << k << "\t" << c << "\t"
           << dec(path[ti][c].re, digits) << "\t" << dec(path[ti][c].im, digits) << "\n";
  return os.str();
}

Json counterexample_record(const Counterexample& ce, unsigned samples) {
  Json j;
  j["eps"] = dec(ce.eps, 30);
  j["C1"] = dec(ce.constants.C1, 30);
  j["C2"] = dec(ce.constants.C2, 30);
  j["tau"] = dec(ce.constants.tau, 30);
  j["omega"] = Json::array({dec(ce.omega.first, 30), dec(ce.omega.second, 30)});
  Json table = Json::array();
  Real p = pi();
  for (unsigned i = 0; i <= samples; ++i) {
    Real x = p * static_cast<int>(i) / static_cast<int>(samples);
    Json row;
    row["x"] = dec(x, 25);
    row["psi"] = dec(ce.psi(x), 25);
    row["phi"] = dec(ce.phi(x), 25);
    row["q"] = dec(ce.q(x), 25);
    table.push_back(row);
  }
  j["table"] = table;
  return j;
}

Json diffop_record(const opcalc::DiffOp& op) {
  Json j;
  j["rows"] = op.rows;
  j["cols"] = op.cols;
  Json entries = Json::array();
  for (size_t r = 0; r < op.rows; ++r)
    for (size_t c = 0; c < op.cols; ++c) {
      const auto& entry = op.at(r, c);
      if (entry.empty()) continue;
      Json e;
      e["row"] = r;
      e["col"] = c;
      Json terms = Json::array();
      for (const auto& [key, coeff] : entry) {
        Json t;
        t["dt"] = key.dt;
        t["dx"] = key.dx;
        Json num = Json::array();
        for (const auto& [mono, val] : coeff.num.terms) {
          Json nm;
          nm["exponents"] = mono;
          nm["coeff"] = val.str();
          num.push_back(nm);
        }
        t["numerator"] = num;
        t["denominator"] = coeff.den;
        terms.push_back(t);
      }
      e["terms"] = terms;
      entries.push_back(e);
    }
  j["entries"] = entries;
  j["max_dt"] = op.max_dt();
  j["max_dx"] = op.max_dx();
  j["max_jet_order"] = op.max_jet_order();
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::IoError, "cannot open " + path + " for writing");
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::IoError, "cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::IoError, "cannot parse " + path + ": " + e.what());
  }
}

}  // namespace pwb::io
