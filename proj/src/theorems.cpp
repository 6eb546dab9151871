#include "scorelab/theorems.hpp"

#include <cmath>

#include "scorelab/rng.hpp"

namespace scorelab::theorems {

nlohmann::json to_json(const BoundReport& r) {
  return nlohmann::json{{"name", r.name},       {"lhs", r.lhs},
                        {"rhs", r.rhs},         {"residual", r.residual},
                        {"tolerance", r.tolerance}, {"pass", r.pass},
                        {"seed", r.seed}};
}

std::string to_jsonl(const std::vector<BoundReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::array<BoundReport, 2> theorem1_reports(const RiskBundle& rb, const std::string& tag,
                                            double tol, std::uint64_t seed) {
  return {make_bound("thm1_lower[" + tag + "]", std::abs(rb.r_madry - rb.c), rb.r_score, tol, seed),
          make_bound("thm1_upper[" + tag + "]", rb.r_score, rb.r_madry + rb.c, tol, seed)};
}

SmoothedDraws make_smoothing_draws(const toydist::ToyDist& gp, int n, std::uint64_t seed) {
  if (gp.kind != toydist::Kind::GaussianPair)
    throw UnsupportedKind("make_smoothing_draws: needs a GaussianPair distribution");
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("make_smoothing_draws: n must be even and >= 2");
  Rng rng(seed);
  SmoothedDraws d;
  d.y.reserve(n);
  d.x0.reserve(n);
  d.omega.reserve(n);
  const double s = std::sqrt(gp.s2);
  for (int k = 0; k < n / 2; ++k) {
    const int y = rng.uniform() < gp.pi1 ? 1 : 0;
    const double x0 = (y == 1 ? gp.mu0 : -gp.mu0) + s * rng.normal();
    const double w = rng.normal();
    for (const double sign : {1.0, -1.0}) {
      d.y.push_back(y);
      d.x0.push_back(x0);
      d.omega.push_back(sign * w);
    }
  }
  return d;
}

KlCeReport verify_kl_ce_form(const mlp::MlpModel& model, const toydist::ToyDist& dist, double x,
                             const toydist::PerturbBall& ball) {
  const Eigen::VectorXd cand = ball.candidates(x);
  const Eigen::Vector2d pd = dist.cond_prob(x);

  KlCeReport rep;
  const simplex::MetricSpec kl{simplex::Base::KL};
  // KL form: D(p_d(y|x) || p_model(y|x')) over candidates.
  double best_kl = -HUGE_VAL;
  // Expected-CE form: sum_y p_d(y|x) (-log p_model(y|x')).
  double best_ce = -HUGE_VAL;
  // Per-label-max form: each label maximizes its own cross-entropy.
  std::array<double, 2> best_label{-HUGE_VAL, -HUGE_VAL};

  for (int k = 0; k < cand.size(); ++k) {
    const Eigen::Vector2d q = model.prob(cand[k]);
    const double v_kl = simplex::eval(kl, pd, q);
    if (v_kl > best_kl) {
      best_kl = v_kl;
      rep.kl_cell = k;
    }
    const double v_ce = -pd[0] * std::log(q[0]) - pd[1] * std::log(q[1]);
    if (v_ce > best_ce) {
      best_ce = v_ce;
      rep.ce_cell = k;
    }
    for (int y = 0; y < 2; ++y) {
      const double v = -std::log(q[y]);
      if (v > best_label[y]) {
        best_label[y] = v;
        rep.per_label_cells[y] = k;
      }
    }
  }
  rep.argmax_same = rep.kl_cell == rep.ce_cell;
  rep.rtilde_differs =
      rep.per_label_cells[0] != rep.kl_cell || rep.per_label_cells[1] != rep.kl_cell;

  // Parameter gradients at each form's own maximizer, each assembled from
  // its own upstream formula.
  const Eigen::Vector2d q_kl = model.prob(cand[rep.kl_cell]);
  const Eigen::VectorXd g_kl =
      model.backward(cand[rep.kl_cell], simplex::grad_q(kl, pd, q_kl)).d_params;
  const Eigen::Vector2d q_ce = model.prob(cand[rep.ce_cell]);
  const Eigen::Vector2d up_ce{-pd[0] / q_ce[0], -pd[1] / q_ce[1]};
  const Eigen::VectorXd g_ce = model.backward(cand[rep.ce_cell], up_ce).d_params;
  rep.grad_sup_diff = (g_kl - g_ce).cwiseAbs().maxCoeff();
  return rep;
}

BoundReport klce_bound(const KlCeReport& rep, double tol, std::uint64_t seed) {
  BoundReport b = make_bound("klce", rep.grad_sup_diff, tol, 0.0, seed);
  b.pass = b.pass && rep.argmax_same;
  return b;
}

mlp::MlpModel random_model(std::uint64_t seed, int hidden) {
  Rng rng(seed);
  mlp::MlpModel m =
      mlp::MlpModel::init({1, hidden, hidden, 1}, mlp::Activation::Tanh, rng.next_u64());
  // Random confidence scale so sweeps cover both flat and saturated outputs.
  m.set_params(m.params() * rng.uniform(0.5, 3.0));
  return m;
}

VerifySetup default_verify_setup() {
  VerifySetup s;
  s.dist = toydist::ToyDist::smooth_sine();
  s.gauss = toydist::ToyDist::gaussian_pair(1.0, 0.5, 0.5);
  s.ball = toydist::PerturbBall(1.0, 41);
  return s;
}

std::vector<BoundReport> run_verify_scope(const std::string& scope, const VerifySetup& setup,
                                          int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("run_verify_scope: trials must be >= 1");
  std::vector<BoundReport> out;
  const toydist::WeightedPoints pts = toydist::quadrature_points(setup.dist, setup.outer_points);
  const std::vector<simplex::MetricSpec> metrics{
      {simplex::Base::L1}, {simplex::Base::L2}, {simplex::Base::Linf}, {simplex::Base::JSdist}};
  const bool all = scope == "all";

  // One (model, metric) instance per trial; the metric cycles with the
  // trial index, so `thm1 --trials 1` emits exactly the two bounds.
  if (all || scope == "thm1") {
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
      const mlp::MlpModel m = random_model(s);
      const auto& spec = metrics[static_cast<std::size_t>(t) % metrics.size()];
      for (auto& r : verify_theorem1(m, setup.dist, spec, setup.ball, pts, setup.tol_exact, s))
        out.push_back(r);
    }
  }
  if (all || scope == "variants") {
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
      const mlp::MlpModel m = random_model(s);
      const auto& spec = metrics[static_cast<std::size_t>(t) % metrics.size()];
      out.push_back(verify_variants(m, setup.dist, spec, setup.ball, pts, setup.tol_exact, s));
    }
  }
  if (all || scope == "equiv") {
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
      const mlp::MlpModel m = random_model(s);
      const auto& spec = metrics[static_cast<std::size_t>(t) % metrics.size()];
      for (double beta : {1.0, 2.0, 6.0})
        for (auto& r :
             verify_equivalence(m, setup.dist, spec, setup.ball, beta, pts, setup.tol_exact, s))
          out.push_back(r);
    }
  }
  if (all || scope == "cor1") {
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
      const mlp::MlpModel m = random_model(s);
      out.push_back(verify_corollary1(m, setup.dist, setup.ball, pts, setup.tol_exact, s));
    }
  }
  if (all || scope == "thm4") {
    const objectives::FlattenedDataModel flat{&setup.dist, 2.0};
    const toydist::WeightedPoints mid = toydist::midpoint_points(setup.dist, 100);
    const std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
    const ConvergenceReport rep = verify_theorem4_expansion(flat, setup.dist, eps_list, mid);
    for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
      char name[48];
      std::snprintf(name, sizeof(name), "thm4_ratio[eps=%g]", rep.eps[i + 1]);
      out.push_back(make_bound(name, rep.ratios[i], 0.75, 0.0, seed));
    }
  }
  if (all || scope == "thm5") {
    const mlp::MlpModel m = random_model(seed ^ 0x5eed);
    for (double sigma : {0.25, 0.5, 1.0}) {
      SmoothingConfig cfg;
      cfg.sigma = sigma;
      cfg.mc_samples = setup.mc_samples;
      cfg.seed = seed;
      out.push_back(verify_theorem5_derivative(setup.gauss, m, cfg));
    }
  }
  if (all || scope == "klce") {
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
      const mlp::MlpModel m = random_model(s);
      const double x = rng.uniform(setup.dist.x_lo, setup.dist.x_hi);
      out.push_back(klce_bound(verify_kl_ce_form(m, setup.dist, x, setup.ball), 1e-10, s));
    }
  }
  if (all || scope == "gamma") {
    const mlp::MlpModel m = random_model(seed ^ 0x6a77a);
    for (double gamma : {0.0, 0.5, 0.75, 2.0}) {
      SmoothingConfig cfg;
      cfg.gamma = gamma;
      cfg.mc_samples = setup.mc_samples;
      cfg.seed = seed;
      out.push_back(verify_gamma_slope(setup.gauss, m, cfg));
    }
  }
  if (out.empty()) throw std::invalid_argument("run_verify_scope: unknown scope '" + scope + "'");
  return out;
}

}  // namespace scorelab::theorems
