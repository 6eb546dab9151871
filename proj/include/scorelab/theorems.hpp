#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "scorelab/mlp.hpp"
#include "scorelab/objectives.hpp"
#include "scorelab/toydist.hpp"

namespace scorelab::theorems {

// One verified inequality: pass iff rhs - lhs >= -tolerance.
struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
};

inline BoundReport make_bound(std::string name, double lhs, double rhs, double tol,
                              std::uint64_t seed) {
  BoundReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.residual = rhs - lhs;
  r.tolerance = tol;
  r.pass = r.residual >= -tol;
  r.seed = seed;
  return r;
}

nlohmann::json to_json(const BoundReport& r);
std::string to_jsonl(const std::vector<BoundReport>& reports);

// The three risks of one sandwich check, all on the same points and
// candidate sets.
struct RiskBundle {
  double r_madry = 0.0;
  double r_score = 0.0;
  double c = 0.0;
};

template <objectives::CondModel M>
RiskBundle risk_bundle(const M& model, const toydist::ToyDist& dist,
                       const toydist::WeightedPoints& pts, const toydist::PerturbBall& ball,
                       const simplex::MetricSpec& spec) {
  const objectives::AttackConfig atk{objectives::AttackMode::GridExact, 0, 0.0, ball};
  RiskBundle rb;
  rb.r_madry = objectives::loss_madry(model, dist, pts, spec, atk);
  rb.r_score = objectives::loss_score(model, dist, pts, spec, atk);
  rb.c = toydist::constant_c(dist, pts, ball, spec);
  return rb;
}

// |r_madry - c| <= r_score <= r_madry + c. Exact on shared candidate sets
// for any metric satisfying symmetry and the triangle inequality.
std::array<BoundReport, 2> theorem1_reports(const RiskBundle& rb, const std::string& tag,
                                            double tol = 1e-9, std::uint64_t seed = 0);

template <objectives::CondModel M>
std::array<BoundReport, 2> verify_theorem1(const M& model, const toydist::ToyDist& dist,
                                           const simplex::MetricSpec& spec,
                                           const toydist::PerturbBall& ball,
                                           const toydist::WeightedPoints& pts,
                                           double tol = 1e-9, std::uint64_t seed = 0) {
  if (!spec.is_distance_metric())
    throw std::invalid_argument("verify_theorem1: spec must be a distance metric");
  return theorem1_reports(risk_bundle(model, dist, pts, ball, spec), spec.name(), tol, seed);
}

// |r_score^D - C^D| <= sqrt(r_madry^{square o D}).
template <objectives::CondModel M>
BoundReport verify_variants(const M& model, const toydist::ToyDist& dist,
                            const simplex::MetricSpec& base_spec, const toydist::PerturbBall& ball,
                            const toydist::WeightedPoints& pts, double tol = 1e-9,
                            std::uint64_t seed = 0) {
  if (!base_spec.is_distance_metric())
    throw std::invalid_argument("verify_variants: base spec must be a distance metric");
  const simplex::MetricSpec squared{base_spec.base, simplex::Phi::Square};
  const objectives::AttackConfig atk{objectives::AttackMode::GridExact, 0, 0.0, ball};
  const double r_score = objectives::loss_score(model, dist, pts, base_spec, atk);
  const double c = toydist::constant_c(dist, pts, ball, base_spec);
  const double r_madry_sq = objectives::loss_madry(model, dist, pts, squared, atk);
  return make_bound("variants[" + base_spec.name() + "]", std::abs(r_score - c),
                    std::sqrt(r_madry_sq), tol, seed);
}

// r_madry <= r_trades(beta) <= (1 + 2 beta) r_madry for beta >= 1.
template <objectives::CondModel M>
std::array<BoundReport, 2> verify_equivalence(const M& model, const toydist::ToyDist& dist,
                                              const simplex::MetricSpec& spec,
                                              const toydist::PerturbBall& ball, double beta,
                                              const toydist::WeightedPoints& pts,
                                              double tol = 1e-9, std::uint64_t seed = 0) {
  if (!(beta >= 1.0))
    throw std::invalid_argument("verify_equivalence: precondition beta >= 1 violated");
  if (!spec.is_distance_metric())
    throw std::invalid_argument("verify_equivalence: spec must be a distance metric");
  const objectives::AttackConfig atk{objectives::AttackMode::GridExact, 0, 0.0, ball};
  const double r_madry = objectives::loss_madry(model, dist, pts, spec, atk);
  const double r_trades =
      objectives::loss_trades(model, dist, pts, spec, atk, objectives::TradesConfig{beta});
  char tag[64];
  std::snprintf(tag, sizeof(tag), "[%s,beta=%g]", spec.name().c_str(), beta);
  return {make_bound(std::string("equiv_lower") + tag, r_madry, r_trades, tol, seed),
          make_bound(std::string("equiv_upper") + tag, r_trades, (1.0 + 2.0 * beta) * r_madry, tol,
                     seed)};
}

// |r_score^{l1} - C^{l1}| <= sqrt(2 r_madry^{KL}); Pinsker applied inside
// the max, then the square-composition bound.
template <objectives::CondModel M>
BoundReport verify_corollary1(const M& model, const toydist::ToyDist& dist,
                              const toydist::PerturbBall& ball, const toydist::WeightedPoints& pts,
                              double tol = 1e-9, std::uint64_t seed = 0) {
  const objectives::AttackConfig atk{objectives::AttackMode::GridExact, 0, 0.0, ball};
  const simplex::MetricSpec l1{simplex::Base::L1};
  const simplex::MetricSpec kl{simplex::Base::KL};
  const double r_score_l1 = objectives::loss_score(model, dist, pts, l1, atk);
  const double c_l1 = toydist::constant_c(dist, pts, ball, l1);
  const double r_madry_kl = objectives::loss_madry(model, dist, pts, kl, atk);
  return make_bound("cor1", std::abs(r_score_l1 - c_l1), std::sqrt(2.0 * r_madry_kl), tol, seed);
}

// o(eps) decay of the first-order expansion of the l1 SCORE risk.
struct ConvergenceReport {
  std::vector<double> eps;
  std::vector<double> residuals;
  std::vector<double> ratios;  // residuals[i+1] / residuals[i]
  double r_standard = 0.0;
  bool pass = false;
};

// residual(eps) = |r_score^{l1}(eps) - r_standard^{l1}
//                  - 2 eps E|d/dx p_d(Y_d|x) - d/dx p_model(Y_d|x)| |.
// Requires the sign condition p_d(Y_d(x)|x) > p_model(Y_d(x)|x) at every
// evaluation point; throws AssumptionError otherwise.
template <objectives::GradCondModel M>
ConvergenceReport verify_theorem4_expansion(const M& model, const toydist::ToyDist& dist,
                                            const std::vector<double>& eps_list,
                                            const toydist::WeightedPoints& pts,
                                            int grid_points = 41, double max_ratio = 0.75) {
  const simplex::MetricSpec l1{simplex::Base::L1};
  ConvergenceReport rep;
  rep.eps = eps_list;

  double first_order_coeff = 0.0;
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    const double x = pts.xs[i];
    const Eigen::Vector2d pd = dist.cond_prob(x);
    const Eigen::Vector2d pm = model.prob(x);
    const int yd = dist.hard_label(x);
    if (!(pd[yd] > pm[yd])) {
      char msg[96];
      std::snprintf(msg, sizeof(msg), "sign condition p_d > p_model at the true label fails at x=%g", x);
      throw AssumptionError(msg);
    }
    const double d_data = (yd == 1 ? 1.0 : -1.0) * dist.eta_prime(x);
    const double d_model = model.prob_input_grad(x)[yd];
    first_order_coeff += pts.ws[i] * std::abs(d_data - d_model);
  }

  const objectives::AttackConfig atk0{objectives::AttackMode::GridExact, 0, 0.0,
                                      toydist::PerturbBall{}};
  rep.r_standard = objectives::loss_standard(model, dist, pts, l1);
  for (double eps : eps_list) {
    objectives::AttackConfig atk = atk0;
    atk.ball = toydist::PerturbBall(eps, grid_points);
    const double r_score = objectives::loss_score(model, dist, pts, l1, atk);
    rep.residuals.push_back(std::abs(r_score - rep.r_standard - 2.0 * eps * first_order_coeff));
  }
  rep.pass = true;
  for (std::size_t i = 0; i + 1 < rep.residuals.size(); ++i) {
    const double prev = rep.residuals[i], next = rep.residuals[i + 1];
    const double ratio = (prev == 0.0) ? (next == 0.0 ? 0.0 : HUGE_VAL) : next / prev;
    rep.ratios.push_back(ratio);
    if (!(ratio <= max_ratio)) rep.pass = false;
  }
  return rep;
}

// Gaussian-smoothing Monte Carlo substrate: common random numbers with
// antithetic noise pairs. Draw 2k and 2k+1 share (y, x0) and use +-omega,
// so odd sqrt(sigma) terms cancel within each pair.
struct SmoothedDraws {
  std::vector<int> y;
  std::vector<double> x0;
  std::vector<double> omega;
  int size() const { return static_cast<int>(y.size()); }
};

SmoothedDraws make_smoothing_draws(const toydist::ToyDist& gauss_pair, int n, std::uint64_t seed);

struct SmoothingConfig {
  double sigma = 0.5;
  double gamma = 0.0;
  int mc_samples = 100000;  // even, >= 1000
  std::uint64_t seed = 1;
  double fd_step = 1e-3;
};

// Monte-Carlo estimate of the Gaussian-augmented cross-entropy at sigma.
template <objectives::CondModel M>
double gaussian_aug_loss(const M& model, const SmoothedDraws& d, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("gaussian_aug_loss: sigma must be >= 0");
  const double root = std::sqrt(sigma);
  double acc = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    const double p = model.prob(d.x0[i] + root * d.omega[i])[d.y[i]];
    acc -= std::log(p);
  }
  return acc / d.size();
}

// Central finite difference of the augmented loss in sigma against the
// closed-form derivative 1/2 E[d/dx log p_model . d/dx log p^sigma(x|y)],
// both on the same draws. Passes within 3 combined standard errors plus a
// fd_step^2 curvature allowance.
template <objectives::GradCondModel M>
BoundReport verify_theorem5_derivative(const toydist::ToyDist& gp, const M& model,
                                       const SmoothingConfig& cfg) {
  if (cfg.mc_samples < 1000 || cfg.mc_samples % 2 != 0)
    throw std::invalid_argument("verify_theorem5_derivative: mc_samples must be even and >= 1000");
  if (!(cfg.sigma >= cfg.fd_step))
    throw std::invalid_argument("verify_theorem5_derivative: sigma must be >= fd_step");
  const SmoothedDraws d = make_smoothing_draws(gp, cfg.mc_samples, cfg.seed);
  const double rp = std::sqrt(cfg.sigma + cfg.fd_step);
  const double rm = std::sqrt(cfg.sigma - cfg.fd_step);
  const double r0 = std::sqrt(cfg.sigma);

  const int pairs = cfg.mc_samples / 2;
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < pairs; ++k) {
    double pair_acc = 0.0;
    for (int j = 0; j < 2; ++j) {
      const int i = 2 * k + j;
      const double lp = -std::log(model.prob(d.x0[i] + rp * d.omega[i])[d.y[i]]);
      const double lm = -std::log(model.prob(d.x0[i] + rm * d.omega[i])[d.y[i]]);
      const double fd = (lp - lm) / (2.0 * cfg.fd_step);
      const double x = d.x0[i] + r0 * d.omega[i];
      const Eigen::Vector2d prob = model.prob(x);
      const double mlg = model.prob_input_grad(x)[d.y[i]] / prob[d.y[i]];
      const double rhs = 0.5 * mlg * gp.smoothed_cond_log_grad(x, d.y[i], cfg.sigma);
      pair_acc += fd - rhs;
    }
    const double pm = pair_acc / 2.0;
    const double delta = pm - mean;
    mean += delta / (k + 1);
    m2 += delta * (pm - mean);
  }
  const double se = std::sqrt(m2 / (pairs - 1) / pairs);
  char name[48];
  std::snprintf(name, sizeof(name), "thm5[sigma=%g]", cfg.sigma);
  return make_bound(name, std::abs(mean), 3.0 * se + cfg.fd_step * cfg.fd_step, 0.0, cfg.seed);
}

struct GammaCombined {
  double value = 0.0;
  double alignment_coeff = 0.0;  // sigma / (2 (1 - gamma)); negative for gamma > 1
};

// (R_G(sigma) - gamma R_G(0)) / (1 - gamma), which expands to
// R_G(0) + alignment_coeff * E[grad alignment] + o(sigma).
template <objectives::CondModel M>
GammaCombined gamma_combined_loss(const toydist::ToyDist& gp, const M& model,
                                  const SmoothingConfig& cfg) {
  if (cfg.gamma == 1.0) throw DomainError("gamma_combined_loss: gamma = 1 is singular");
  const SmoothedDraws d = make_smoothing_draws(gp, cfg.mc_samples, cfg.seed);
  const double r_sigma = gaussian_aug_loss(model, d, cfg.sigma);
  const double r_zero = gaussian_aug_loss(model, d, 0.0);
  GammaCombined out;
  out.value = (r_sigma - cfg.gamma * r_zero) / (1.0 - cfg.gamma);
  out.alignment_coeff = cfg.sigma / (2.0 * (1.0 - cfg.gamma));
  return out;
}

// Measured d/dsigma of the gamma-combined loss at sigma = 0 (one-sided
// Richardson) against the declared coefficient slope. CRN + antithetic
// pairs cancel the sqrt(sigma) sampling noise, so the comparison is tight.
template <objectives::GradCondModel M>
BoundReport verify_gamma_slope(const toydist::ToyDist& gp, const M& model,
                               const SmoothingConfig& cfg) {
  if (cfg.gamma == 1.0) throw DomainError("verify_gamma_slope: gamma = 1 is singular");
  if (cfg.mc_samples < 1000 || cfg.mc_samples % 2 != 0)
    throw std::invalid_argument("verify_gamma_slope: mc_samples must be even and >= 1000");
  const SmoothedDraws d = make_smoothing_draws(gp, cfg.mc_samples, cfg.seed);
  const double delta = cfg.fd_step;
  const double r1 = std::sqrt(delta), r2 = std::sqrt(2.0 * delta);
  const double scale = 1.0 / (1.0 - cfg.gamma);

  const int pairs = cfg.mc_samples / 2;
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < pairs; ++k) {
    double pair_acc = 0.0;
    for (int j = 0; j < 2; ++j) {
      const int i = 2 * k + j;
      const double l0 = -std::log(model.prob(d.x0[i])[d.y[i]]);
      const double l1 = -std::log(model.prob(d.x0[i] + r1 * d.omega[i])[d.y[i]]);
      const double l2 = -std::log(model.prob(d.x0[i] + r2 * d.omega[i])[d.y[i]]);
      const double slope = (-3.0 * l0 + 4.0 * l1 - l2) / (2.0 * delta);
      const Eigen::Vector2d prob = model.prob(d.x0[i]);
      const double mlg = model.prob_input_grad(d.x0[i])[d.y[i]] / prob[d.y[i]];
      const double predicted = 0.5 * mlg * gp.smoothed_cond_log_grad(d.x0[i], d.y[i], 0.0);
      pair_acc += scale * (slope - predicted);
    }
    const double pm = pair_acc / 2.0;
    const double dlt = pm - mean;
    mean += dlt / (k + 1);
    m2 += dlt * (pm - mean);
  }
  const double se = std::sqrt(m2 / (pairs - 1) / pairs);
  char name[48];
  std::snprintf(name, sizeof(name), "gamma[%g]", cfg.gamma);
  const double allowance = delta * delta * std::abs(scale);
  return make_bound(name, std::abs(mean), 3.0 * se + allowance, 0.0, cfg.seed);
}

// The KL-form and expected-cross-entropy-form inner objectives differ by a
// constant in x', so they share every maximizer and every parameter
// gradient. The per-label-max form can pick different candidates; that is
// reported, not failed.
struct KlCeReport {
  int kl_cell = 0;
  int ce_cell = 0;
  bool argmax_same = false;
  double grad_sup_diff = 0.0;
  std::array<int, 2> per_label_cells{0, 0};
  bool rtilde_differs = false;
};

KlCeReport verify_kl_ce_form(const mlp::MlpModel& model, const toydist::ToyDist& dist, double x,
                             const toydist::PerturbBall& ball);

BoundReport klce_bound(const KlCeReport& rep, double tol = 1e-10, std::uint64_t seed = 0);

// MLP with seeded init and a random confidence scale, for verification sweeps.
mlp::MlpModel random_model(std::uint64_t seed, int hidden = 32);

// Everything one `verify` invocation needs.
struct VerifySetup {
  toydist::ToyDist dist;        // sandwich / expansion substrate
  toydist::ToyDist gauss;       // smoothing substrate (GaussianPair)
  toydist::PerturbBall ball;
  int outer_points = 101;
  int mc_samples = 100000;
  double tol_exact = 1e-9;
};

VerifySetup default_verify_setup();

// scope: all | thm1 | variants | equiv | cor1 | thm4 | thm5 | klce | gamma.
std::vector<BoundReport> run_verify_scope(const std::string& scope, const VerifySetup& setup,
                                          int trials, std::uint64_t seed);

}  // namespace scorelab::theorems
