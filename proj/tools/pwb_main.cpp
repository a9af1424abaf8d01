// Workbench front end: spectra, controllability verdicts, biorthogonal
// families, control synthesis, spectral simulation, the variable-coefficient
// counterexample, and the operator-calculus checks, each as a subcommand
// writing deterministic decimal-string records.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "pwb/io.hpp"

using namespace pwb;
using io::Json;

namespace {

unsigned env_precision(unsigned fallback) {
  const char* env = std::getenv("WORKBENCH_PRECISION");
  if (!env) return fallback;
  long v = std::atol(env);
  return v >= 16 ? static_cast<unsigned>(v) : fallback;
}

struct SurdSpec {
  long a = 0, b = 1, c = 2, e = 1;
};

bool parse_surd(const std::string& s, SurdSpec& out) {
  return std::sscanf(s.c_str(), "%ld,%ld,%ld,%ld", &out.a, &out.b, &out.c, &out.e) == 4;
}

int exit_code_for(const Verdict& v) {
  switch (v.outcome) {
    case Outcome::Controllable: return 0;
    case Outcome::Undetermined: return 0;
    case Outcome::Resonant: return 2;
    case Outcome::NotControllable: return 2;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controllability workbench for coupled parabolic systems"};
  app.require_subcommand(1);

  std::string out_stem = "pwb-out";
  unsigned precision = 50;
  unsigned seed = 0;
  app.add_option("--out", out_stem, "output file stem")->capture_default_str();
  app.add_option("--precision", precision, "working precision in decimal digits");
  app.add_option("--seed", seed, "seed recorded for randomized suites");

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "explicit adjoint spectrum");
  sp->fallthrough();
  int sp_n = 2, sp_kmax = 10;
  std::string sp_d = "1", sp_alpha = "0";
  sp->add_option("--n", sp_n)->required();
  sp->add_option("--d", sp_d)->required();
  sp->add_option("--alpha", sp_alpha)->required();
  sp->add_option("--kmax", sp_kmax)->required();

  // check
  auto* ck = app.add_subcommand("check", "controllability verdicts");
  ck->fallthrough();
  std::string ck_setting = "boundary";
  int ck_n = 2, ck_kmax = 50;
  std::string ck_d = "1", ck_alpha = "0";
  long ck_x0num = 0, ck_x0den = 0;
  std::string ck_surd;
  std::string ck_T;
  ck->add_option("--setting", ck_setting, "boundary|distributed|pointwise")->required();
  ck->add_option("--n", ck_n)->required();
  ck->add_option("--d", ck_d)->required();
  ck->add_option("--alpha", ck_alpha)->required();
  ck->add_option("--kmax", ck_kmax);
  ck->add_option("--x0-num", ck_x0num, "numerator of x0/pi");
  ck->add_option("--x0-den", ck_x0den, "denominator of x0/pi");
  ck->add_option("--x0-surd", ck_surd, "irrational x0/pi as a,b,c,e for (a+b*sqrt(c))/e");
  ck->add_option("--T", ck_T, "horizon for the pointwise-null verdict");

  // biortho
  auto* bo = app.add_subcommand("biortho", "minimal-norm biorthogonal family");
  bo->fallthrough();
  std::string bo_file, bo_T = "1";
  unsigned bo_eta = 1;
  bo->add_option("--lambda-file", bo_file)->required();
  bo->add_option("--T", bo_T)->required();
  bo->add_option("--eta", bo_eta, "polynomial degree count per exponent");

  // synthesize
  auto* sy = app.add_subcommand("synthesize", "moment-method control synthesis");
  sy->fallthrough();
  std::string sy_setting = "boundary";
  int sy_n = 2, sy_K = 4;
  std::string sy_d = "1", sy_alpha = "0", sy_T = "1", sy_y0, sy_surd;
  sy->add_option("--setting", sy_setting, "boundary|pointwise");
  sy->add_option("--n", sy_n)->required();
  sy->add_option("--d", sy_d)->required();
  sy->add_option("--alpha", sy_alpha)->required();
  sy->add_option("--T", sy_T)->required();
  sy->add_option("--K", sy_K)->required();
  sy->add_option("--y0", sy_y0, "initial-state record file")->required();
  sy->add_option("--x0-surd", sy_surd, "pointwise location for --setting pointwise");

  // simulate
  auto* si = app.add_subcommand("simulate", "spectral forward simulation");
  si->fallthrough();
  std::string si_params, si_y0, si_control, si_T = "1";
  int si_kmax = 8, si_steps = 16;
  si->add_option("--params", si_params)->required();
  si->add_option("--y0", si_y0)->required();
  si->add_option("--control", si_control);
  si->add_option("--kmax", si_kmax);
  si->add_option("--steps", si_steps);
  si->add_option("--T", si_T)->required();

  // counterexample
  auto* ce = app.add_subcommand("counterexample", "variable-coefficient witness");
  ce->fallthrough();
  std::string ce_mode = "build", ce_eps = "0.02", ce_variant = "plateau";
  unsigned ce_grid = 10000;
  ce->add_option("mode", ce_mode, "build|verify");
  ce->add_option("--eps", ce_eps);
  ce->add_option("--grid", ce_grid);
  ce->add_option("--variant", ce_variant, "plateau|flat|expwindow");

  // resolve
  auto* rs = app.add_subcommand("resolve", "operator resolvability checks");
  rs->fallthrough();
  std::string rs_mode = "symbolic";
  unsigned rs_degree = 6;
  rs->add_option("mode", rs_mode, "symbolic|polynomial|numeric");
  rs->add_option("--q-poly-degree", rs_degree);

  CLI11_PARSE(app, argc, argv);
  precision = env_precision(precision);

  try {
    PrecisionGuard guard(precision);
    Json config;
    config["precision"] = precision;
    config["seed"] = seed;

    if (*sp) {
      auto params = SystemParams::make(sp_n, sp_d, sp_alpha, precision);
      Spectrum s = compute_spectrum(params, sp_kmax);
      Json j;
      config["command"] = "spectrum";
      config["kmax"] = sp_kmax;
      j["config"] = config;
      j["spectrum"] = io::spectrum_record(s);
      io::write_json(out_stem + ".json", j);
      std::cout << "wrote " << out_stem << ".json (" << s.pairs.size() << " pairs, "
                << s.collisions.size() / 2 << " collisions)\n";
      return 0;
    }

    if (*ck) {
      auto params = SystemParams::make(ck_n, ck_d, ck_alpha, precision);
      Verdict v;
      if (ck_setting == "boundary") {
        v = check_boundary(params, ck_kmax);
      } else if (ck_setting == "distributed") {
        v = check_distributed(params, ck_kmax);
      } else if (ck_setting == "pointwise") {
        if (ck_x0den > 0) {
          v = check_pointwise(params, X0Spec::rational(ck_x0num, ck_x0den), ck_kmax);
        } else if (!ck_surd.empty()) {
          SurdSpec surd;
          if (!parse_surd(ck_surd, surd)) fail(Errc::BadInput, "--x0-surd expects a,b,c,e");
          Irrational theta = Irrational::surd(surd.a, surd.b, surd.c, surd.e);
          if (!ck_T.empty())
            v = check_pointwise_null(params, theta, parse_real(ck_T), ck_kmax);
          else
            v = check_pointwise(params, X0Spec::irrational(theta), ck_kmax);
        } else {
          fail(Errc::BadInput, "pointwise check needs --x0-num/--x0-den or --x0-surd");
        }
      } else {
        fail(Errc::BadInput, "unknown setting '" + ck_setting + "'");
      }
      Json j;
      config["command"] = "check";
      config["setting"] = ck_setting;
      config["n"] = ck_n;
      config["d"] = ck_d;
      config["alpha"] = ck_alpha;
      config["kmax"] = ck_kmax;
      j["config"] = config;
      j["verdict"] = io::verdict_record(v);
      io::write_json(out_stem + ".json", j);
      std::cout << setting_name(v.setting) << ": " << outcome_name(v.outcome) << " (" << v.reason
                << ")\n";
      return exit_code_for(v);
    }

    if (*bo) {
      Json lam = io::read_json(bo_file);
      ExponentFamily family = io::exponent_family_from(lam, parse_real(bo_T), precision, bo_eta);
      BiorthogonalFamily bio = biortho(family);
      Json j;
      config["command"] = "biortho";
      config["lambda_file"] = bo_file;
      config["T"] = bo_T;
      config["eta"] = bo_eta;
      j["config"] = config;
      j["family"] = io::biortho_record(bio);
      io::write_json(out_stem + ".json", j);
      std::cout << "residual " << dec(bio.residual, 6) << ", condition "
                << dec(bio.gram_condition, 6) << "\n";
      return 0;
    }

    if (*sy) {
      auto params = SystemParams::make(sy_n, sy_d, sy_alpha, precision);
      InitialState y0 = io::initial_state_from(io::read_json(sy_y0));
      Real T = parse_real(sy_T);
      config["command"] = "synthesize";
      config["setting"] = sy_setting;
      config["n"] = sy_n;
      config["d"] = sy_d;
      config["alpha"] = sy_alpha;
      config["T"] = sy_T;
      config["K"] = sy_K;
      config["y0"] = sy_y0;

      MomentProblem problem;
      Json extra;
      if (sy_setting == "pointwise") {
        SurdSpec surd;
        if (sy_surd.empty() || !parse_surd(sy_surd, surd))
          fail(Errc::BadInput, "pointwise synthesis needs --x0-surd a,b,c,e");
        Spectrum s = compute_spectrum(params, sy_K);
        problem = build_pointwise_problem(
            params, s, y0, Irrational::surd(surd.a, surd.b, surd.c, surd.e), sy_K, T);
      } else if (params.alpha == 0) {
        problem = build_alpha0_problem(params, y0, sy_K, T);
      } else {
        // Resonant couplings route through the compatibility subspace.
        bool resonant = false;
        if (params.n == 2 && params.alpha > 0 && params.d_exact && params.alpha_exact) {
          Rat ratio = *params.alpha_exact / (*params.d_exact * *params.d_exact);
          resonant = sqrt_as_positive_integer(ratio).has_value();
        }
        if (resonant) {
          ResonantSynthesis rs2 = build_resonant_problem(params, y0, sy_K, T);
          extra["membership"] = rs2.membership.member;
          if (!rs2.membership.member) {
            extra["violated_condition"] = rs2.membership.violated_condition;
            extra["violated_k"] = rs2.membership.violated_k;
            extra["detail"] = rs2.membership.detail;
            Json j;
            j["config"] = config;
            j["incompatible"] = extra;
            io::write_json(out_stem + ".json", j);
            std::cout << "initial state is outside the compatibility subspace ("
                      << rs2.membership.detail << ")\n";
            return 2;
          }
          problem = *rs2.problem;
        } else {
          Spectrum s = compute_spectrum(params, sy_K);
          problem = build_boundary_problem(params, s, y0, sy_K, T);
        }
      }
      ControlSignal control = solve_problem(problem);
      control.resample(129);
      MomentResiduals res = verify_moments(control, problem);
      Json j;
      j["config"] = config;
      if (!extra.empty()) j["resonant"] = extra;
      j["control"] = io::control_record(control);
      j["max_moment_residual"] = dec(res.max_residual, 20);
      io::write_json(out_stem + ".json", j);
      std::cout << "synthesized " << control.terms.size() << " terms, max moment residual "
                << dec(res.max_residual, 6) << "\n";
      return 0;
    }

    if (*si) {
      auto params = io::params_from(io::read_json(si_params));
      InitialState y0 = io::initial_state_from(io::read_json(si_y0));
      ControlSignal control;
      bool has_control = !si_control.empty();
      if (has_control) control = io::control_from(io::read_json(si_control).at("control"));
      Real T = parse_real(si_T);
      std::vector<Real> grid;
      for (int i = 0; i <= si_steps; ++i) grid.push_back(T * i / si_steps);
      ModalTrajectory traj =
          simulate_boundary(params, y0, has_control ? &control : nullptr, si_kmax, grid);
      config["command"] = "simulate";
      config["params"] = si_params;
      config["y0"] = si_y0;
      config["control"] = si_control;
      config["kmax"] = si_kmax;
      config["steps"] = si_steps;
      config["T"] = si_T;
      Json j;
      j["config"] = config;
      j["summary"] = io::trajectory_summary(traj);
      io::write_json(out_stem + ".json", j);
      io::write_text(out_stem + ".tsv", io::trajectory_table(traj));
      std::cout << "terminal |y(T)|_{H^-1} = " << dec(traj.terminal_Hm1, 6)
                << ", |y(T)|_{L^2} = " << dec(traj.terminal_L2, 6) << "\n";
      return 0;
    }

    if (*ce) {
      BumpVariant variant = ce_variant == "flat"        ? BumpVariant::FlatProfile
                            : ce_variant == "expwindow" ? BumpVariant::ExpPlateau
                                                        : BumpVariant::SmoothPlateau;
      Counterexample cex = build_counterexample(parse_real(ce_eps), variant, precision);
      config["command"] = "counterexample";
      config["mode"] = ce_mode;
      config["eps"] = ce_eps;
      config["grid"] = ce_grid;
      config["variant"] = ce_variant;
      Json j;
      j["config"] = config;
      j["construction"] = io::counterexample_record(cex, std::min(ce_grid, 2000u));
      if (ce_mode == "verify") {
        CounterexampleReport rep = verify_counterexample(cex, ce_grid);
        Json r;
        r["pass"] = rep.pass;
        r["ode1_residual"] = dec(rep.ode1_residual, 10);
        r["ode2_residual"] = dec(rep.ode2_residual, 10);
        r["boundary_defect"] = dec(rep.boundary_defect, 10);
        r["phi_max_on_omega"] = dec(rep.phi_max_on_omega, 10);
        r["psi_norm"] = dec(rep.psi_norm, 10);
        r["phi_norm"] = dec(rep.phi_norm, 10);
        Json fails = Json::array();
        for (const auto& f : rep.failures) fails.push_back(f);
        r["failures"] = fails;
        j["verification"] = r;
        io::write_json(out_stem + ".json", j);
        std::cout << (rep.pass ? "witness verified" : "witness verification FAILED") << "\n";
        return rep.pass ? 0 : 2;
      }
      io::write_json(out_stem + ".json", j);
      std::cout << "built witness: C1 = " << dec(cex.constants.C1, 8)
                << ", C2 = " << dec(cex.constants.C2, 8)
                << ", tau = " << dec(cex.constants.tau, 8) << "\n";
      return 0;
    }

    if (*rs) {
      config["command"] = "resolve";
      config["mode"] = rs_mode;
      Json j;
      j["config"] = config;
      if (rs_mode == "symbolic") {
        opcalc::IdentityCheck left = opcalc::verify_identity_MstarLstar();
        opcalc::IdentityCheck right = opcalc::verify_identity_LM();
        opcalc::MstarChain chain = opcalc::build_Mstar_chain();
        j["Mstar_Lstar_identity"] = left.ok;
        j["L_M_identity"] = right.ok;
        j["L"] = io::diffop_record(opcalc::build_L());
        j["Lstar"] = io::diffop_record(opcalc::build_Lstar());
        j["Mstar"] = io::diffop_record(chain.Mstar);
        j["M"] = io::diffop_record(opcalc::formal_adjoint(chain.Mstar));
        io::write_json(out_stem + ".json", j);
        std::cout << "Mstar o Lstar = Id: " << (left.ok ? "yes" : "NO")
                  << "; L o M = Id: " << (right.ok ? "yes" : "NO") << "\n";
        return left.ok && right.ok ? 0 : 2;
      }
      if (rs_mode == "polynomial") {
        opcalc::MstarChain chain = opcalc::build_Mstar_chain();
        opcalc::DiffOp Ls = opcalc::build_Lstar();
        opcalc::DiffOp L = opcalc::build_L();
        opcalc::DiffOp M = opcalc::formal_adjoint(chain.Mstar);
        bool ok = true;
        unsigned checked = 0;
        for (unsigned a = 0; a <= rs_degree && ok; ++a)
          for (unsigned b = 0; b <= rs_degree && ok; ++b) {
            std::vector<opcalc::XRat> psi{
                opcalc::XRat::poly(opcalc::BivarPoly::monomial(a, b, Rat(1))),
                opcalc::XRat::poly(opcalc::BivarPoly::monomial(b, a, Rat(1, 2)))};
            auto back = opcalc::apply_subst_x(chain.Mstar, opcalc::apply_subst_x(Ls, psi));
            ok = ok && back[0] == psi[0] && back[1] == psi[1];
            auto round = opcalc::apply_subst_x(L, opcalc::apply_subst_x(M, psi));
            ok = ok && round[0] == psi[0] && round[1] == psi[1];
            ++checked;
          }
        j["degree"] = rs_degree;
        j["cases"] = checked;
        j["exact"] = ok;
        io::write_json(out_stem + ".json", j);
        std::cout << "polynomial substitution q(x) = x, " << checked
                  << " cases: " << (ok ? "exact" : "FAILED") << "\n";
        return ok ? 0 : 2;
      }
      if (rs_mode == "numeric") {
        Counterexample cex = build_counterexample(Real("0.02"), BumpVariant::ExpPlateau, 40);
        auto [wlo, whi] = *cex.bumps.exp_window;
        Real xc = (wlo + whi) / 2;
        opcalc::MstarChain chain = opcalc::build_Mstar_chain();
        unsigned jet_order = chain.Mstar.max_jet_order();
        auto qjets = [&](const Real& x) {
          Jet jet = cex.q.jet(x, jet_order);
          std::vector<Real> out(jet_order + 1);
          for (unsigned m = 0; m <= jet_order; ++m) out[m] = jet.derivative(m);
          return out;
        };
        auto psi1 = [](const Real& t, const Real& x) { return sin(2 * x) * exp(-t); };
        auto psi2 = [](const Real& t, const Real& x) { return cos(x) * exp(-2 * t); };
        std::vector<opcalc::Field2> w{
            [&](const Real& t, const Real& x) {
              return sin(2 * x) * exp(-t) + 4 * sin(2 * x) * exp(-t) +
                     cex.q(x) * sin(2 * x) * exp(-t);
            },
            [&](const Real& t, const Real& x) {
              return 2 * cos(x) * exp(-2 * t) + cos(x) * exp(-2 * t) + 4 * sin(2 * x) * exp(-t);
            },
            [&](const Real& t, const Real& x) { return -cos(x) * exp(-2 * t); }};
        Real t0 = parse_real("0.7");
        auto residual_for = [&](const Real& h) {
          auto got = opcalc::apply_numeric(chain.Mstar, w, qjets, t0, xc, h);
          Real r{0};
          r = std::max(r, abs(got[0] - psi1(t0, xc)));
          r = std::max(r, abs(got[1] - psi2(t0, xc)));
          return r;
        };
        Real h0 = (whi - wlo) / 24;
        Real r1 = residual_for(h0);
        Real r2 = residual_for(h0 / 2);
        Real order = log(r1 / r2) / log(Real(2));
        j["residual_h"] = dec(r1, 8);
        j["residual_h_half"] = dec(r2, 8);
        j["observed_order"] = dec(order, 6);
        bool ok = r1 < ten_pow(-4) && order >= 3;
        j["pass"] = ok;
        io::write_json(out_stem + ".json", j);
        std::cout << "numeric check: residual " << dec(r1, 4) << " -> " << dec(r2, 4)
                  << ", order " << dec(order, 4) << (ok ? " (pass)" : " (FAIL)") << "\n";
        return ok ? 0 : 2;
      }
      fail(Errc::BadInput, "unknown resolve mode '" + rs_mode + "'");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
