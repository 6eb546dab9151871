#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <concepts>
#include <limits>

#include "scorelab/simplex.hpp"
#include "scorelab/toydist.hpp"

namespace scorelab::objectives {

// Anything that maps x to a binary conditional. The data conditional, its
// flattened copies and the trained MLP all satisfy this.
template <typename M>
concept CondModel = requires(const M& m, double x) {
  { m.prob(x) } -> std::convertible_to<Eigen::Vector2d>;
};

// Additionally exposes d prob / dx, needed for input-gradient objectives.
template <typename M>
concept GradCondModel = CondModel<M> && requires(const M& m, double x) {
  { m.prob_input_grad(x) } -> std::convertible_to<Eigen::Vector2d>;
};

// The data conditional used as a model (the self-consistent optimum).
struct DataModel {
  const toydist::ToyDist* dist = nullptr;
  Eigen::Vector2d prob(double x) const { return dist->cond_prob(x); }
  Eigen::Vector2d prob_input_grad(double x) const {
    const double g = dist->eta_prime(x);
    return {-g, g};
  }
};

// eta_hat = 1/2 + (eta - 1/2)/temperature. For temperature > 1 this sits
// strictly between the data conditional and the uniform one at every x.
struct FlattenedDataModel {
  const toydist::ToyDist* dist = nullptr;
  double temperature = 2.0;
  Eigen::Vector2d prob(double x) const {
    return simplex::binary_prob(0.5 + (dist->eta(x) - 0.5) / temperature);
  }
  Eigen::Vector2d prob_input_grad(double x) const {
    const double g = dist->eta_prime(x) / temperature;
    return {-g, g};
  }
};

struct ConstantModel {
  double eta = 0.5;
  Eigen::Vector2d prob(double) const { return simplex::binary_prob(eta); }
  Eigen::Vector2d prob_input_grad(double) const { return {0.0, 0.0}; }
};

// Which conditional anchors the inner maximization.
enum class Anchor { Madry, Score, Trades };

enum class AttackMode { GridExact, PGD };

struct AttackConfig {
  AttackMode mode = AttackMode::GridExact;
  int steps = 10;
  double step_size = 0.25;
  toydist::PerturbBall ball;
};

struct InnerMax {
  double x_adv = 0.0;
  double value = 0.0;
  int cell = 0;  // index into the candidate set
};

// Inner objective at a fixed perturbed point.
template <CondModel M>
double anchored_value(const M& model, const toydist::ToyDist& dist, const simplex::MetricSpec& spec,
                      Anchor anchor, double x, double x_prime) {
  switch (anchor) {
    case Anchor::Madry: return simplex::eval(spec, dist.cond_prob(x), model.prob(x_prime));
    case Anchor::Score: return simplex::eval(spec, dist.cond_prob(x_prime), model.prob(x_prime));
    case Anchor::Trades: return simplex::eval(spec, model.prob(x), model.prob(x_prime));
  }
  return 0.0;
}

// max over the candidate set S(x) of the anchored objective. GridExact scans
// all candidates (first maximum wins); PGD runs sign ascent inside the ball
// and lands on the nearest candidate, so its value never exceeds GridExact's.
template <CondModel M>
InnerMax inner_max(const M& model, const toydist::ToyDist& dist, double x,
                   const simplex::MetricSpec& spec, Anchor anchor, const AttackConfig& atk) {
  const Eigen::VectorXd cand = atk.ball.candidates(x);
  const auto value_at = [&](double xp) { return anchored_value(model, dist, spec, anchor, x, xp); };

  if (atk.mode == AttackMode::GridExact) {
    // Start at the clean point so a flat objective keeps x_adv = x; only a
    // strictly larger value moves the maximizer.
    const int c0 = atk.ball.center_index();
    InnerMax best{cand[c0], value_at(cand[c0]), c0};
    for (int k = 0; k < cand.size(); ++k) {
      if (k == c0) continue;
      const double v = value_at(cand[k]);
      if (v > best.value) best = {cand[k], v, k};
    }
    return best;
  }

  // PGD: projected sign ascent from the clean point, derivative by central
  // difference (1-d, only the sign matters).
  const double eps = atk.ball.epsilon;
  const double fd = 1e-6;
  double xp = x;
  for (int s = 0; s < atk.steps; ++s) {
    const double g = value_at(xp + fd) - value_at(xp - fd);
    xp += atk.step_size * (g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0));
    xp = std::clamp(xp, x - eps, x + eps);
  }
  // Snap onto the candidate set; keep the clean point if it scores higher.
  const int h = atk.ball.center_index();
  int k = eps > 0.0 ? static_cast<int>(std::lround((xp - x) / atk.ball.step())) + h : h;
  k = std::clamp(k, 0, atk.ball.grid_points - 1);
  InnerMax res{cand[k], value_at(cand[k]), k};
  const double center = value_at(cand[h]);
  if (center > res.value) res = {cand[h], center, h};
  return res;
}

// Mean over the points of D(p_d(y|x) || p_model(y|x)).
template <CondModel M>
double loss_standard(const M& model, const toydist::ToyDist& dist, const toydist::WeightedPoints& pts,
                     const simplex::MetricSpec& spec) {
  if (pts.size() == 0) throw std::invalid_argument("loss_standard: empty point set");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pts.size(); ++i)
    acc += pts.ws[i] * simplex::eval(spec, dist.cond_prob(pts.xs[i]), model.prob(pts.xs[i]));
  return acc;
}

// Cross-entropy / data-entropy split of the standard KL loss:
// KL = cross_entropy - data_entropy.
struct CeDecomposition {
  double cross_entropy = 0.0;
  double data_entropy = 0.0;
};

template <CondModel M>
CeDecomposition standard_ce_terms(const M& model, const toydist::ToyDist& dist,
                                  const toydist::WeightedPoints& pts) {
  CeDecomposition d;
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    const Eigen::Vector2d p = dist.cond_prob(pts.xs[i]);
    const Eigen::Vector2d q = model.prob(pts.xs[i]);
    for (int y = 0; y < 2; ++y) {
      if (p[y] == 0.0) continue;
      if (q[y] <= 0.0) throw InfiniteDivergence("standard_ce_terms: model probability is zero");
      d.cross_entropy -= pts.ws[i] * p[y] * std::log(q[y]);
      d.data_entropy -= pts.ws[i] * p[y] * std::log(p[y]);
    }
  }
  return d;
}

template <CondModel M>
double loss_madry(const M& model, const toydist::ToyDist& dist, const toydist::WeightedPoints& pts,
                  const simplex::MetricSpec& spec, const AttackConfig& atk) {
  if (pts.size() == 0) throw std::invalid_argument("loss_madry: empty point set");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pts.size(); ++i)
    acc += pts.ws[i] * inner_max(model, dist, pts.xs[i], spec, Anchor::Madry, atk).value;
  return acc;
}

// Self-consistent robust risk: the data conditional is read at the perturbed
// point, so the model matching it everywhere scores exactly zero.
template <CondModel M>
double loss_score(const M& model, const toydist::ToyDist& dist, const toydist::WeightedPoints& pts,
                  const simplex::MetricSpec& spec, const AttackConfig& atk) {
  if (pts.size() == 0) throw std::invalid_argument("loss_score: empty point set");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pts.size(); ++i)
    acc += pts.ws[i] * inner_max(model, dist, pts.xs[i], spec, Anchor::Score, atk).value;
  return acc;
}

struct TradesConfig {
  double beta = 6.0;
};

// Clean-fit term plus beta times the worst model self-discrepancy over the ball.
template <CondModel M>
double loss_trades(const M& model, const toydist::ToyDist& dist, const toydist::WeightedPoints& pts,
                   const simplex::MetricSpec& spec, const AttackConfig& atk, const TradesConfig& cfg) {
  if (pts.size() == 0) throw std::invalid_argument("loss_trades: empty point set");
  if (!(cfg.beta >= 1.0)) throw std::invalid_argument("loss_trades: beta must be >= 1");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    const double x = pts.xs[i];
    const double clean = simplex::eval(spec, dist.cond_prob(x), model.prob(x));
    const double worst = inner_max(model, dist, x, spec, Anchor::Trades, atk).value;
    acc += pts.ws[i] * (clean + cfg.beta * worst);
  }
  return acc;
}

struct ClipConfig {
  double threshold = 0.4;
  bool enabled = false;
};

struct Clipped {
  double value = 0.0;
  double grad_scale = 1.0;
};

// Lower clip: once the batch loss drops below the threshold the value is
// held there and the update is zeroed, halting descent past the floor.
inline Clipped clip_loss(double value, const ClipConfig& cfg) {
  if (cfg.enabled && cfg.threshold >= 0.0 && value < cfg.threshold) return {cfg.threshold, 0.0};
  return {value, 1.0};
}

// Smallest |delta| that flips the predicted hard label, bisected to tol.
// Scans outward on a coarse radius grid in both directions first; returns
// +inf when no flip exists within r_hi.
template <CondModel M>
double min_flip_radius(const M& model, double x, double r_lo, double r_hi, double tol,
                       int scan_points = 256) {
  if (!(r_hi > r_lo) || r_lo < 0.0) throw std::invalid_argument("min_flip_radius: bad search interval");
  if (!(tol > 0.0)) throw std::invalid_argument("min_flip_radius: tol must be positive");
  const int base = simplex::argmax_label(model.prob(x));
  const auto flips = [&](double delta) {
    return simplex::argmax_label(model.prob(x + delta)) != base;
  };

  double best = std::numeric_limits<double>::infinity();
  const double h = (r_hi - r_lo) / scan_points;
  for (const double dir : {+1.0, -1.0}) {
    double prev = r_lo;
    if (r_lo > 0.0 && flips(dir * r_lo)) {  // already flipped at the inner edge
      best = std::min(best, r_lo);
      continue;
    }
    for (int k = 1; k <= scan_points; ++k) {
      const double r = r_lo + k * h;
      if (flips(dir * r)) {
        double lo = prev, hi = r;
        while (hi - lo > tol) {
          const double mid = 0.5 * (lo + hi);
          (flips(dir * mid) ? hi : lo) = mid;
        }
        best = std::min(best, hi);
        break;
      }
      prev = r;
    }
  }
  return best;
}

struct ZeroOne {
  double std01 = 0.0;
  double madry01 = 0.0;
  double score01 = 0.0;
};

// Indicator-valued criteria. std01 compares hard labels at the clean point;
// madry01 takes the worst candidate against the clean data label; score01
// takes the worst candidate against the data label at that candidate.
template <CondModel M>
ZeroOne zero_one_errors(const M& model, const toydist::ToyDist& dist,
                        const toydist::WeightedPoints& pts, const toydist::PerturbBall& ball) {
  if (pts.size() == 0) throw std::invalid_argument("zero_one_errors: empty point set");
  ZeroOne z;
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    const double x = pts.xs[i];
    const int yd = dist.hard_label(x);
    const int ym = simplex::argmax_label(model.prob(x));
    if (ym != yd) z.std01 += pts.ws[i];
    const Eigen::VectorXd cand = ball.candidates(x);
    bool madry_hit = false, score_hit = false;
    for (Eigen::Index k = 0; k < cand.size() && !(madry_hit && score_hit); ++k) {
      const int ymk = simplex::argmax_label(model.prob(cand[k]));
      if (ymk != yd) madry_hit = true;
      if (ymk != dist.hard_label(cand[k])) score_hit = true;
    }
    if (madry_hit) z.madry01 += pts.ws[i];
    if (score_hit) z.score01 += pts.ws[i];
  }
  return z;
}

// d/dx KL(p_d(y|x) || p_model(y|x)) assembled from the data log gradient and
// the model input gradient:
//   sum_y p_d(y|x) [ -d/dx log p_model(y|x)
//                    + d/dx log p_d(y|x) * (log p_d(y|x) - log p_model(y|x)) ].
template <GradCondModel M>
double direct_score_input_grad(const M& model, const toydist::ToyDist& dist, double x) {
  const Eigen::Vector2d pd = dist.cond_prob(x);
  const Eigen::Vector2d pm = model.prob(x);
  const Eigen::Vector2d dm = model.prob_input_grad(x);
  double acc = 0.0;
  for (int y = 0; y < 2; ++y) {
    const double data_lg = dist.data_log_grad(x, y);  // DomainError if p_d(y|x) = 0
    if (pm[y] <= 0.0) throw InfiniteDivergence("direct_score_input_grad: model probability is zero");
    const double model_lg = dm[y] / pm[y];
    acc += pd[y] * (-model_lg + data_lg * (std::log(pd[y]) - std::log(pm[y])));
  }
  return acc;
}

}  // namespace scorelab::objectives
