#include "mourre/experiments.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mourre/eig_sym.hpp"

namespace mourre {

namespace {

const char* kVersion = "mourre-lab 0.1.0";

const std::set<std::string>& legal_keys() {
  static const std::set<std::string> keys = {
      "experiment", "c", "r_max", "n", "k", "mu2", "coupling", "coupling_rate",
      "node_slope", "potential", "potential_param", "lambda", "upsilon", "chi_a0",
      "chi_a1", "theta_scaling", "a", "b", "eps", "theta", "eps_min", "eps_max",
      "eps_points", "lambda_min", "lambda_max", "lambda_points", "lambda_list",
      "upsilon_list", "n_list", "j_lo", "j_hi", "i_lo", "i_hi", "bulk_inner_frac",
      "bulk_outer_frac", "bulk_mass_max", "out_dir", "seed"};
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  std::size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

RVec geometric_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi > lo) || points < 2)
    throw ConfigError("geometric grid requires 0 < lo < hi and >= 2 points");
  RVec g(points);
  const double ratio = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(ratio * i);
  g.front() = lo;
  g.back() = hi;
  return g;
}

double fgr_oracle(double k) {
  const double xi = std::sqrt(k - 0.25);
  return xi / ((1.0 + xi * xi) * (1.0 + xi * xi));
}

struct Defaults {
  double c = 1.0, r_max = 201.0;
  std::size_t n = 3999;
};

Defaults experiment_defaults(const std::string& name) {
  Defaults d;
  if (name == "fgr-sweep" || name == "block-orders") {
    d.r_max = 2001.0;
    d.n = 32767;
  } else if (name == "mourre-gap" || name == "reduced-gap") {
    d.r_max = 601.0;
    d.n = 8191;
  } else if (name == "final-gap") {
    d.r_max = 2001.0;
    d.n = 2047;
  } else if (name == "virial") {
    d.r_max = 201.0;
    d.n = 1023;
  } else if (name == "resonance-width" || name == "decay-threshold" ||
             name == "commutator-leading") {
    d.r_max = 201.0;
    d.n = 2047;
  }
  return d;
}

ModelConfig model_from(const ExperimentConfig& cfg) {
  const Defaults d = experiment_defaults(cfg.experiment);
  const double c = cfg.get_double("c", d.c);
  const double r_max = cfg.get_double("r_max", d.r_max);
  const std::size_t n = cfg.get_size("n", d.n);
  ModelConfig m = default_model(build_grid(c, r_max, n));
  m.k = cfg.get_double("k", 1.0);
  m.discrete_levels = {m.k, cfg.get_double("mu2", 5.0)};
  const std::string cname = cfg.get_string("coupling", "exp");
  const double rate = cfg.get_double("coupling_rate", 1.0);
  if (cname == "exp_node") {
    double slope = cfg.get_double("node_slope", -1.0);
    if (slope < 0.0) slope = node_coupling_slope(m.grid, m.k);
    m.couplings = {make_profile("exp_node", rate, slope), make_profile("zero")};
  } else {
    m.couplings = {make_profile(cname, rate), make_profile("zero")};
  }
  m.potential = make_profile(cfg.get_string("potential", "zero"),
                             cfg.get_double("potential_param", 1.0));
  m.lambda = cfg.get_double("lambda", 1e-3);
  return m;
}

RemovalParams removal_from(const ExperimentConfig& cfg) {
  RemovalParams rp;
  rp.inner_margin_frac = cfg.get_double("bulk_inner_frac", rp.inner_margin_frac);
  rp.outer_margin_frac = cfg.get_double("bulk_outer_frac", rp.outer_margin_frac);
  rp.boundary_mass_max = cfg.get_double("bulk_mass_max", rp.boundary_mass_max);
  return rp;
}

CutoffChi chi_from(const ExperimentConfig& cfg) {
  CutoffChi chi;
  chi.a0 = cfg.get_double("chi_a0", 1.0);
  chi.a1 = cfg.get_double("chi_a1", 3.0);
  return chi;
}

void add_check(RunReport& rep, const std::string& name, bool pass, double value,
               const std::string& detail = "") {
  rep.checks.push_back({name, pass, value, detail});
}

double spectral_norm_estimate(const Matrix& a, std::uint64_t seed) {
  const std::size_t n = a.rows();
  Vec x(n);
  for (auto& v : x) {
    seed += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = seed;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    v = cplx(static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53 - 0.5, 0.0);
  }
  double nx = norm2(x);
  for (auto& v : x) v /= nx;
  double lam = 0.0;
  for (int it = 0; it < 40; ++it) {
    Vec y = matvec(a, x);
    Vec z = matvec(a, y);  // Hermitian square
    const double nz = norm2(z);
    if (nz == 0.0) return 0.0;
    lam = std::sqrt(norm2(y));
    for (auto& v : z) v /= nz;
    x = std::move(z);
  }
  return lam;
}

// ---------------------------------------------------------------------------
// experiment runners

void run_fgr_sweep(const ExperimentConfig& cfg, RunReport& rep) {
  ModelConfig m = model_from(cfg);
  const ModelOperator h0 = assemble_h0(m);
  const PotentialOperator v = assemble_potential(m);
  const RVec eps_grid = geometric_grid(cfg.get_double("eps_min", 1e-2),
                                       cfg.get_double("eps_max", 1e-1),
                                       cfg.get_size("eps_points", 12));
  const FgrReport fr = fgr_limit(h0, v, m.k, eps_grid);

  rep.columns = {"eps", "eig_min", "eig_max", "scaled_min", "scaled_max"};
  for (const auto& s : fr.samples)
    rep.rows.push_back({s.eps, s.eig_min, s.eig_max, s.scaled_min, s.scaled_max});
  rep.fitted["slope"] = fr.slope;
  rep.fitted["c0"] = fr.c0;
  rep.fitted["c1"] = fr.c1;
  rep.fitted["c2"] = fr.c2;
  rep.fitted["fit_residual"] = fr.fit_residual;
  rep.fitted["window_valid"] = fr.window_valid ? 1.0 : 0.0;
  const double oracle = fgr_oracle(m.k);
  rep.fitted["gamma_oracle"] = oracle;

  const std::string cname = cfg.get_string("coupling", "exp");
  if (cname == "zero") {
    add_check(rep, "fgr-violated-as-expected", !fr.fgr_holds && fr.c0 <= 1e-10, fr.c0);
  } else if (cname == "exp_node") {
    add_check(rep, "node-kills-golden-rule", fr.c0 <= 0.02 * oracle, fr.c0,
              "c0 vanishes within fit residual");
  } else {
    add_check(rep, "slope-is-minus-one", std::abs(fr.slope + 1.0) <= 0.05, fr.slope);
    add_check(rep, "gamma-matches-oracle", std::abs(fr.c0 - oracle) <= 0.10 * oracle,
              fr.c0, "oracle " + std::to_string(oracle));
  }
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

void run_mourre_gap(const ExperimentConfig& cfg, RunReport& rep) {
  ModelConfig m = model_from(cfg);
  const ModelOperator h0 = assemble_h0(m);
  const RemovalParams rp = removal_from(cfg);
  const CutoffChi chi = chi_from(cfg);
  const double j_lo = cfg.get_double("j_lo", 0.8);
  const double j_hi = cfg.get_double("j_hi", 1.2);
  const RVec upsilons = cfg.get_list("upsilon_list", {4.0, 8.0, 16.0});

  rep.columns = {"upsilon",   "g_ref",    "g_raw",        "g_bulk",  "eps_upsilon",
                 "dim_window", "dim_bulk", "compact_norm", "pass"};
  std::vector<GapReport> reports(upsilons.size());
  parallel_for_index(upsilons.size(), [&](std::size_t i) {
    SOperator s(m.grid, upsilons[i], chi, m.m());
    reports[i] = mourre_gap(h0, s, j_lo, j_hi, rp, /*free_channel=*/true);
  });
  for (std::size_t i = 0; i < upsilons.size(); ++i) {
    const GapReport& g = reports[i];
    rep.rows.push_back({upsilons[i], g.g_ref, g.g_raw, g.g_bulk, g.eps_upsilon,
                        static_cast<double>(g.dim_window),
                        static_cast<double>(g.dim_bulk), g.compact_norm,
                        g.pass ? 1.0 : 0.0});
  }
  // headline at the middle Upsilon (default 8)
  const std::size_t mid = upsilons.size() / 2;
  rep.fitted["g_ref"] = reports[mid].g_ref;
  rep.fitted["g_bulk"] = reports[mid].g_bulk;
  rep.fitted["eps_upsilon"] = reports[mid].eps_upsilon;
  add_check(rep, "gap-clears-reference", reports[mid].pass, reports[mid].g_bulk,
            "threshold 0.9 * g_ref = " + std::to_string(0.9 * reports[mid].g_ref));
  bool mono = true;
  for (std::size_t i = 0; i + 1 < reports.size(); ++i)
    mono = mono && (reports[i + 1].eps_upsilon <= reports[i].eps_upsilon + 1e-9);
  add_check(rep, "eps-upsilon-nonincreasing", mono, reports.back().eps_upsilon);
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

void run_reduced_gap(const ExperimentConfig& cfg, RunReport& rep) {
  ModelConfig m = model_from(cfg);
  const ModelOperator h0 = assemble_h0(m);
  const RemovalParams rp = removal_from(cfg);
  const CutoffChi chi = chi_from(cfg);
  const double upsilon = cfg.get_double("upsilon", 8.0);
  const double j_lo = cfg.get_double("j_lo", m.k - 0.1);
  const double j_hi = cfg.get_double("j_hi", m.k + 0.1);
  SOperator s(m.grid, upsilon, chi, m.m());
  const ReducedGapReport rg = reduced_gap(h0, s, j_lo, j_hi, rp);

  rep.columns = {"iter",   "j_lo",   "j_hi",        "g_raw",     "g_bulk",
                 "c_min",  "compact_norm", "dim_window", "dim_bulk"};
  for (std::size_t i = 0; i < rg.steps.size(); ++i) {
    const auto& st = rg.steps[i];
    rep.rows.push_back({static_cast<double>(i), st.j_lo, st.j_hi, st.g_raw, st.g_bulk,
                        st.c_min, st.compact_norm, static_cast<double>(st.dim_window),
                        static_cast<double>(st.dim_bulk)});
  }
  rep.fitted["c"] = rg.c;
  rep.fitted["iters"] = static_cast<double>(rg.steps.size());
  rep.fitted["final_j_lo"] = rg.j_lo;
  rep.fitted["final_j_hi"] = rg.j_hi;
  add_check(rep, "shrinking-terminates", rg.success, static_cast<double>(rg.steps.size()));
  if (rg.success)
    add_check(rep, "gap-on-pbar", rg.c >= rg.steps.back().c_min, rg.c);
  bool mono = true;
  for (std::size_t i = 0; i + 1 < rg.steps.size(); ++i)
    mono = mono && (rg.steps[i + 1].compact_norm <=
                    rg.steps[i].compact_norm * (1.0 + 1e-9) + 1e-12);
  add_check(rep, "compact-part-shrinks", mono,
            rg.steps.empty() ? 0.0 : rg.steps.back().compact_norm);
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

void run_block_orders(const ExperimentConfig& cfg, RunReport& rep) {
  ModelConfig m = model_from(cfg);
  const ModelOperator h0 = assemble_h0(m);
  const PotentialOperator v = assemble_potential(m);
  const CutoffChi chi = chi_from(cfg);
  const double upsilon = cfg.get_double("upsilon", 8.0);
  const double a = cfg.get_double("a", 2.0 / 3.0);
  const double b = cfg.get_double("b", 1.0 / 3.0);
  if (!(b > 0.0 && b < a && a < 1.0))
    throw ConfigError("block-orders: exponents must satisfy 0 < b < a < 1");
  const double j_lo = cfg.get_double("j_lo", m.k - 0.1);
  const double j_hi = cfg.get_double("j_hi", m.k + 0.1);
  const RVec lambdas = cfg.get_list(
      "lambda_list", geometric_grid(cfg.get_double("lambda_min", 1e-3),
                                    cfg.get_double("lambda_max", 1e-2),
                                    cfg.get_size("lambda_points", 6)));
  SOperator s(m.grid, upsilon, chi, m.m());

  rep.columns = {"lambda", "eps",    "theta",  "p1_bb",  "p1_off", "p1_pp",
                 "p2_bb",  "p2_off", "p2_pp",  "p3_bb",  "p3_off", "p3_pp",
                 "pp_identity_error"};
  const ModelWindow w = model_window(h0, j_lo, j_hi, false);
  const Matrix c1_raw = piece_one_compressed(h0, v, s, w);
  std::vector<BlockNorms> bn(lambdas.size());
  parallel_for_index(lambdas.size(), [&](std::size_t i) {
    const double lam = lambdas[i];
    const double eps = std::pow(lam, a), theta = std::pow(lam, b);
    const BEpsFactors bf = build_b_epsilon_factors(h0, v, m.k, eps);
    bn[i] = block_norms(h0, v, s, bf, lam, theta, eps, w, &c1_raw);
  });
  for (const auto& x : bn)
    rep.rows.push_back({x.lambda, x.eps, x.theta, x.p1_bb, x.p1_off, x.p1_pp, x.p2_bb,
                        x.p2_off, x.p2_pp, x.p3_bb, x.p3_off, x.p3_pp,
                        x.p3_pp_identity_error});

  auto fit_exponent = [&](const std::function<double(const BlockNorms&)>& pick) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t np = 0;
    for (const auto& x : bn) {
      const double val = pick(x);
      if (val <= 0.0) continue;
      const double lx = std::log(x.lambda), ly = std::log(val);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++np;
    }
    if (np < 2) return 0.0;
    const double dn = static_cast<double>(np);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  };
  const double e1 = fit_exponent(
      [](const BlockNorms& x) { return std::max(x.p1_bb, x.p1_off); });
  const double e2 = fit_exponent([](const BlockNorms& x) { return x.p2_off; });
  const double e3 = fit_exponent(
      [](const BlockNorms& x) { return std::max(x.p3_bb, x.p3_off); });
  const double pred1 = 1.0, pred2 = 1.0 + b - 0.5 * a, pred3 = 2.0 + b - 1.5 * a;
  rep.fitted["exp1"] = e1;
  rep.fitted["exp2"] = e2;
  rep.fitted["exp3"] = e3;
  rep.fitted["pred1"] = pred1;
  rep.fitted["pred2"] = pred2;
  rep.fitted["pred3"] = pred3;
  add_check(rep, "piece1-order", std::abs(e1 - pred1) <= 0.15 * pred1, e1);
  add_check(rep, "piece2-order", std::abs(e2 - pred2) <= 0.15 * pred2, e2);
  add_check(rep, "piece3-order", std::abs(e3 - pred3) <= 0.15 * pred3, e3);
  double max_ident = 0.0;
  for (const auto& x : bn) max_ident = std::max(max_ident, x.p3_pp_identity_error);
  add_check(rep, "pp-block-identity", max_ident <= 1e-11, max_ident,
            "PP block equals lambda^2 theta G_eps");
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

void run_final_gap(const ExperimentConfig& cfg, RunReport& rep) {
  ModelConfig healthy = model_from(cfg);
  const RemovalParams rp = removal_from(cfg);
  const CutoffChi chi = chi_from(cfg);
  const double upsilon = cfg.get_double("upsilon", 8.0);
  const double a = cfg.get_double("a", 2.0 / 3.0);
  const double b = cfg.get_double("b", 1.0 / 3.0);
  const double i_lo = cfg.get_double("i_lo", healthy.k - 0.05);
  const double i_hi = cfg.get_double("i_hi", healthy.k + 0.05);
  const RVec lambdas = cfg.get_list("lambda_list", {1e-3, 3e-3, 1e-2});

  ModelConfig node = healthy;
  node.couplings = {make_profile("exp_node", 1.0, node_coupling_slope(node.grid, node.k)),
                    make_profile("zero")};

  rep.columns = {"coupling_id", "lambda", "eps",     "theta",    "g_raw",
                 "g_bulk",      "c_hat",  "c_hat_raw", "dim_window", "dim_bulk"};
  std::vector<FinalGapReport> hr(lambdas.size()), nr(lambdas.size());
  parallel_for_index(2 * lambdas.size(), [&](std::size_t t) {
    const std::size_t i = t % lambdas.size();
    if (t < lambdas.size())
      hr[i] = final_gap(healthy, upsilon, chi, lambdas[i], a, b, i_lo, i_hi, rp);
    else
      nr[i] = final_gap(node, upsilon, chi, lambdas[i], a, b, i_lo, i_hi, rp);
  });
  auto emit = [&](double id, const FinalGapReport& g) {
    rep.rows.push_back({id, g.lambda, g.eps, g.theta, g.g_raw, g.g_bulk, g.c_hat,
                        g.c_hat_raw, static_cast<double>(g.dim_window),
                        static_cast<double>(g.dim_bulk)});
  };
  for (const auto& g : hr) emit(0.0, g);
  for (const auto& g : nr) emit(1.0, g);

  auto stable_positive = [](const std::vector<FinalGapReport>& v) {
    RVec c;
    for (const auto& g : v) c.push_back(g.c_hat);
    bool pos = true;
    for (double x : c) pos = pos && (x > 0.0);
    if (!pos || c.empty()) return false;
    RVec sorted = c;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    bool stable = true;
    for (double x : c) stable = stable && (std::abs(x - med) <= 0.5 * med);
    return stable;
  };
  const bool healthy_ok = stable_positive(hr);
  const bool node_fails = !stable_positive(nr);
  rep.fitted["c_hat_mid"] = hr.size() > 1 ? hr[hr.size() / 2].c_hat : hr.front().c_hat;
  add_check(rep, "positivity-stable", healthy_ok,
            hr.empty() ? 0.0 : hr.front().c_hat);
  add_check(rep, "golden-rule-violation-fails", node_fails,
            nr.empty() ? 0.0 : nr.front().c_hat);
  rep.pass = healthy_ok && node_fails;
}

void run_virial(const ExperimentConfig& cfg, RunReport& rep) {
  ModelConfig m = model_from(cfg);
  const ModelOperator h0 = assemble_h0(m);
  const PotentialOperator v = assemble_potential(m);
  const CutoffChi chi = chi_from(cfg);
  const double upsilon = cfg.get_double("upsilon", 8.0);
  const double lambda = cfg.get_double("lambda", 1e-3);
  const double eps = cfg.get_double("eps", 0.06);
  const double theta = cfg.get_double("theta", 0.15);

  SOperator s(m.grid, upsilon, chi, m.m());
  const Matrix s_dense = s.dense();
  const Matrix b_dense = build_b_epsilon(h0, v, m.k, eps);
  const Matrix s_hat = assemble_s_hat(s_dense, k_projector_basis(h0), b_dense, lambda, theta);

  const Matrix hl = dense_h_lambda(h0, v, lambda);
  SymEig eig = hermitian_eig(hl, true);
  const double h_norm =
      std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  const double s_norm = spectral_norm_estimate(s_hat, cfg.seed);
  Applier apply_h = [&](const Vec& x) { return apply_h_lambda(h0, v, lambda, x); };

  rep.columns = {"index", "kappa", "residual"};
  double max_res = 0.0;
  const std::size_t dim = hl.rows();
  std::vector<double> residuals(dim);
  parallel_for_index(dim, [&](std::size_t i) {
    Vec f(dim);
    for (std::size_t j = 0; j < dim; ++j) f[j] = eig.vectors(i, j);
    residuals[i] = virial_residual(apply_h, s_hat, f, eig.values[i], h_norm, s_norm);
  });
  for (std::size_t i = 0; i < dim; ++i) {
    rep.rows.push_back({static_cast<double>(i), eig.values[i], residuals[i]});
    max_res = std::max(max_res, residuals[i]);
  }
  rep.fitted["max_residual"] = max_res;
  rep.fitted["h_norm"] = h_norm;
  rep.fitted["s_hat_norm"] = s_norm;
  add_check(rep, "virial-residual", max_res <= 1e-10, max_res);
  rep.pass = max_res <= 1e-10;
}

void run_resonance_width(const ExperimentConfig& cfg, RunReport& rep) {
  ModelConfig m = model_from(cfg);
  const double theta = cfg.get_double("theta_scaling", 0.3);
  const RVec lambdas = cfg.get_list(
      "lambda_list", geometric_grid(cfg.get_double("lambda_min", 0.00884),
                                    cfg.get_double("lambda_max", 0.05),
                                    cfg.get_size("lambda_points", 8)));
  const ResonanceReport rr = width_scan(m, theta, lambdas);

  rep.columns = {"lambda", "re_zeta", "im_zeta"};
  for (std::size_t i = 0; i < rr.lambdas.size(); ++i)
    rep.rows.push_back({rr.lambdas[i], rr.zetas[i].real(), rr.zetas[i].imag()});

  // golden-rule coefficient from the long-channel sweep
  ModelConfig fm = m;
  fm.grid = build_grid(m.grid.c, m.grid.c + 2000.0, 32767);
  const ModelOperator fh0 = assemble_h0(fm);
  const PotentialOperator fv = assemble_potential(fm);
  const FgrReport fr = fgr_limit(fh0, fv, fm.k, geometric_grid(1e-2, 1e-1, 12));
  const double gamma_fgr = fr.c0;

  // scaling-angle independence at a fixed small lambda
  const double lam_chk = cfg.get_double("lambda", 0.01);
  const cplx z1 = locate_resonance(m, theta, lam_chk);
  const cplx z2 = locate_resonance(m, theta + 0.1, lam_chk);
  const double drift = std::abs(z1 - z2);

  // zero-coupling control: the eigenvalue stays real
  ModelConfig zc = m;
  zc.couplings = {make_profile("zero"), make_profile("zero")};
  const cplx zz = locate_resonance(zc, theta, 0.02);

  // width evenness in the coupling sign
  ModelConfig neg = m;
  const double lam_even = 0.0125;
  const cplx zp = locate_resonance(m, theta, lam_even);
  const cplx zn = locate_resonance(neg, theta, -lam_even);
  const double evenness =
      std::abs(zp.imag() - zn.imag()) / std::max(1e-300, std::abs(zp.imag()));

  rep.fitted["gamma_fit"] = rr.gamma_fit;
  rep.fitted["gamma_fgr"] = gamma_fgr;
  rep.fitted["ratio"] = rr.gamma_fit / gamma_fgr;
  rep.fitted["fit_residual"] = rr.fit_residual;
  rep.fitted["theta_drift"] = drift;
  rep.fitted["im_zero_coupling"] = zz.imag();
  rep.fitted["evenness_defect"] = evenness;
  rep.fitted["re_shift_max"] = rr.re_shift_max;

  const double ratio = rr.gamma_fit / gamma_fgr;
  add_check(rep, "width-matches-golden-rule", ratio >= 0.8 && ratio <= 1.2, ratio);
  add_check(rep, "scaling-angle-independence",
            drift <= 1e-6 * (1.0 + std::abs(z1)), drift);
  add_check(rep, "zero-coupling-stays-real", std::abs(zz.imag()) <= 1e-10, zz.imag());
  add_check(rep, "width-even-in-coupling-sign", evenness <= 0.1, evenness);
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

void run_decay_threshold(const ExperimentConfig& cfg, RunReport& rep) {
  const double upsilon = cfg.get_double("upsilon", 8.0);
  const CutoffChi chi = chi_from(cfg);
  const double lambda = cfg.get_double("lambda", 1e-3);
  const double eps = cfg.get_double("eps", 0.06);
  const double theta = cfg.get_double("theta", 0.15);

  struct Case {
    const char* label;
    Profile potential;
    bool borderline;
    bool expect_decaying;
  };
  std::vector<Case> cases = {
      {"power-1.5", make_profile("power", 1.5), false, true},
      {"const", make_profile("const", 1.0), false, false},
      {"power-1.0", make_profile("power", 1.0), true, true},
  };

  rep.columns = {"profile_id", "rho", "tau"};
  std::vector<CompactnessProxy> proxies(cases.size());
  parallel_for_index(cases.size(), [&](std::size_t ci) {
    ModelConfig m = model_from(cfg);
    m.potential = cases[ci].potential;
    const ModelOperator h0 = assemble_h0(m);
    const PotentialOperator v = assemble_potential(m);
    SOperator s(m.grid, upsilon, chi, m.m());
    const Matrix s_dense = s.dense();
    const Matrix b_dense = build_b_epsilon(h0, v, m.k, eps);
    const Matrix s_hat =
        assemble_s_hat(s_dense, k_projector_basis(h0), b_dense, lambda, theta);
    proxies[ci] = compactness_proxy(m, s_hat, 8, cases[ci].borderline);
  });
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    for (std::size_t t = 0; t < proxies[ci].radii.size(); ++t)
      rep.rows.push_back({static_cast<double>(ci), proxies[ci].radii[t],
                          proxies[ci].tail_norms[t]});
    rep.fitted[std::string("ratio_") + cases[ci].label] = proxies[ci].ratio;
  }
  add_check(rep, "decaying-potential", proxies[0].verdict == "decaying",
            proxies[0].ratio);
  add_check(rep, "non-decaying-potential", proxies[1].verdict == "non-decaying",
            proxies[1].ratio);
  add_check(rep, "borderline-recorded", proxies[2].verdict == "borderline-recorded",
            proxies[2].ratio, "no verdict asserted");
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

void run_commutator_leading(const ExperimentConfig& cfg, RunReport& rep) {
  const CutoffChi chi = chi_from(cfg);
  const double c = cfg.get_double("c", 1.0);
  const double r_max = cfg.get_double("r_max", 201.0);
  const RVec ns = cfg.get_list("n_list", {511.0, 1023.0, 2047.0});
  const RVec ups = cfg.get_list("upsilon_list", {8.0, 16.0});

  rep.columns = {"n", "h", "upsilon", "residual", "lhs_norm", "rhs_norm", "ratio"};
  struct Slot {
    double n, ups;
    LeadingTermReport r;
  };
  std::vector<Slot> slots;
  for (double nn : ns)
    for (double u : ups) slots.push_back({nn, u, {}});
  parallel_for_index(slots.size(), [&](std::size_t i) {
    const Grid g = build_grid(c, r_max, static_cast<std::size_t>(slots[i].n));
    slots[i].r = leading_term_residual(g, slots[i].ups, chi);
  });
  for (const auto& s : slots) {
    const Grid g = build_grid(c, r_max, static_cast<std::size_t>(s.n));
    rep.rows.push_back(
        {s.n, g.h, s.ups, s.r.residual, s.r.lhs_norm, s.r.rhs_norm, s.r.ratio()});
  }
  // O(h) trend at the first Upsilon: ratio decreases under grid refinement
  RVec ratios;
  for (const auto& s : slots)
    if (s.ups == ups.front()) ratios.push_back(s.r.ratio());
  bool shrink = ratios.size() >= 2 && ratios.back() <= 0.7 * ratios.front();
  rep.fitted["ratio_coarse"] = ratios.empty() ? 0.0 : ratios.front();
  rep.fitted["ratio_fine"] = ratios.empty() ? 0.0 : ratios.back();
  add_check(rep, "leading-term-residual-shrinks-with-h", shrink,
            ratios.empty() ? 0.0 : ratios.back());
  rep.pass = shrink;
}

}  // namespace

// ---------------------------------------------------------------------------

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a number: " + it->second);
  }
}

std::size_t ExperimentConfig::get_size(const std::string& key, std::size_t fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  if (v < 0 || v != std::floor(v))
    throw ConfigError("config: key '" + key + "' must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

RVec ExperimentConfig::get_list(const std::string& key, const RVec& fallback) const {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  RVec out;
  std::string token;
  std::istringstream in(it->second);
  while (in >> token) {
    if (!token.empty() && token.back() == ',') token.pop_back();
    if (token.empty()) continue;
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError("config: list key '" + key + "' has a bad entry: " + token);
    }
  }
  if (out.empty()) throw ConfigError("config: list key '" + key + "' is empty");
  return out;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    if (legal_keys().count(key) == 0)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
    if (cfg.kv.count(key) > 0)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    cfg.kv[key] = value;
  }
  if (cfg.kv.count("experiment") == 0)
    throw ConfigError(origin + ": missing required key 'experiment'");
  cfg.experiment = cfg.kv.at("experiment");
  if (experiment_registry().count(cfg.experiment) == 0)
    throw ConfigError(origin + ": unknown experiment '" + cfg.experiment + "'");
  cfg.out_dir = cfg.get_string("out_dir", "out");
  cfg.seed = static_cast<std::uint64_t>(cfg.get_double("seed", 20250810.0));

  // validation shared across scaling experiments
  if (cfg.experiment == "final-gap" || cfg.experiment == "block-orders") {
    const double a = cfg.get_double("a", 2.0 / 3.0);
    const double b = cfg.get_double("b", 1.0 / 3.0);
    if (!(b > 0.0 && b < a && a < 1.0))
      throw ConfigError(origin + ": scaling exponents need 0 < b < a < 1 (got a=" +
                        std::to_string(a) + ", b=" + std::to_string(b) + ")");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

const std::map<std::string, std::string>& experiment_registry() {
  static const std::map<std::string, std::string> reg = {
      {"fgr-sweep", "fermi-golden-rule-scaling"},
      {"mourre-gap", "localized-commutator-estimate"},
      {"reduced-gap", "reduced-estimate-interval-shrinking"},
      {"block-orders", "commutator-block-order-scaling"},
      {"final-gap", "full-chain-positivity"},
      {"virial", "virial-identity"},
      {"resonance-width", "resonance-width-quadratic-law"},
      {"decay-threshold", "decay-hypothesis-compactness-proxy"},
      {"commutator-leading", "dilation-commutator-leading-term"},
  };
  return reg;
}

void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MOURRE_LAB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) workers = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("MOURRE_LAB_THREADS must be a positive integer");
    }
  }
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next(0);
  std::vector<std::thread> pool;
  std::atomic<bool> failed(false);
  std::string error_message;
  std::mutex err_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::scoped_lock lk(err_mutex);
          failed = true;
          if (error_message.empty()) error_message = e.what();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed) throw NumericsError("parallel sweep failed: " + error_message);
}

RunReport run_experiment(const ExperimentConfig& config) {
  RunReport rep;
  rep.experiment = config.experiment;
  rep.verifies = experiment_registry().at(config.experiment);
  rep.config_echo = config.kv;
  rep.version = kVersion;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (config.experiment == "fgr-sweep")
      run_fgr_sweep(config, rep);
    else if (config.experiment == "mourre-gap")
      run_mourre_gap(config, rep);
    else if (config.experiment == "reduced-gap")
      run_reduced_gap(config, rep);
    else if (config.experiment == "block-orders")
      run_block_orders(config, rep);
    else if (config.experiment == "final-gap")
      run_final_gap(config, rep);
    else if (config.experiment == "virial")
      run_virial(config, rep);
    else if (config.experiment == "resonance-width")
      run_resonance_width(config, rep);
    else if (config.experiment == "decay-threshold")
      run_decay_threshold(config, rep);
    else if (config.experiment == "commutator-leading")
      run_commutator_leading(config, rep);
    else
      throw ConfigError("run_experiment: unknown experiment " + config.experiment);
  } catch (const std::exception& e) {
    rep.error = true;
    rep.pass = false;
    rep.error_message = e.what();
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::string> write_report(const RunReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("write_report: cannot create directory " + dir);

  std::vector<std::string> files;
  // report.json
  {
    nlohmann::json j;
    j["experiment"] = report.experiment;
    j["verifies"] = report.verifies;
    j["version"] = report.version;
    j["config"] = report.config_echo;
    j["columns"] = report.columns;
    j["rows"] = report.rows;
    j["fitted"] = report.fitted;
    j["pass"] = report.pass;
    j["error"] = report.error;
    if (report.error) j["error_message"] = report.error_message;
    j["wall_seconds"] = report.wall_seconds;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks)
      checks.push_back({{"name", c.name},
                        {"pass", c.pass},
                        {"value", c.value},
                        {"detail", c.detail}});
    j["checks"] = checks;
    const std::string path = (fs::path(dir) / "report.json").string();
    std::ofstream out(path);
    if (!out) throw ConfigError("write_report: cannot write " + path);
    out << j.dump(2) << "\n";
    files.push_back(path);
  }
  // table.csv
  {
    const std::string path = (fs::path(dir) / "table.csv").string();
    std::ofstream out(path);
    if (!out) throw ConfigError("write_report: cannot write " + path);
    for (std::size_t i = 0; i < report.columns.size(); ++i)
      out << (i ? "," : "") << report.columns[i];
    out << "\n";
    for (const auto& row : report.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << fmt17(row[i]);
      out << "\n";
    }
    files.push_back(path);
  }
  // summary.txt
  {
    const std::string path = (fs::path(dir) / "summary.txt").string();
    std::ofstream out(path);
    if (!out) throw ConfigError("write_report: cannot write " + path);
    out << report.experiment << " (" << report.verifies << ")\n";
    if (report.error) {
      out << "ERROR: " << report.error_message << "\n";
    } else {
      if (report.rows.empty()) out << "no points\n";
      for (const auto& [key, val] : report.fitted)
        out << "  " << key << " = " << fmt17(val) << "\n";
      for (const auto& c : report.checks)
        out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (value " << fmt17(c.value)
            << (c.detail.empty() ? "" : ", " + c.detail) << ")\n";
    }
    out << (report.pass ? "RESULT: PASS" : "RESULT: FAIL") << "\n";
    files.push_back(path);
  }
  return files;
}

}  // namespace mourre
