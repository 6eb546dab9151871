#include "scorelab/trainer.hpp"

#include <cmath>
#include <cstdio>

namespace scorelab::trainer {

namespace {

using objectives::Anchor;
using objectives::AttackConfig;
using objectives::AttackMode;
using toydist::WeightedPoints;

WeightedPoints batch_points(const toydist::ToyDist& dist, const BatchConfig& b) {
  if (b.mode == BatchConfig::Mode::FullQuadrature) return toydist::quadrature_points(dist, b.points);
  return toydist::sample_points(dist, b.n, b.seed);
}

struct LossGrad {
  double value = 0.0;
  Eigen::VectorXd grad;
};

LossGrad eval_loss_grad(const mlp::MlpModel& model, const toydist::ToyDist& dist,
                        const TrainConfig& cfg, const WeightedPoints& pts) {
  LossGrad out;
  out.grad = Eigen::VectorXd::Zero(model.param_count());
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    const double x = pts.xs[i];
    const double w = pts.ws[i];
    switch (cfg.objective) {
      case Objective::Standard: {
        const Eigen::Vector2d pd = dist.cond_prob(x);
        const Eigen::Vector2d q = model.prob(x);
        out.value += w * simplex::eval(cfg.spec, pd, q);
        const Eigen::Vector2d up = w * simplex::grad_q(cfg.spec, pd, q);
        out.grad += model.backward(x, up).d_params;
        break;
      }
      case Objective::Madry: {
        const auto im = objectives::inner_max(model, dist, x, cfg.spec, Anchor::Madry, cfg.attack);
        out.value += w * im.value;
        const Eigen::Vector2d pd = dist.cond_prob(x);
        const Eigen::Vector2d q = model.prob(im.x_adv);
        const Eigen::Vector2d up = w * simplex::grad_q(cfg.spec, pd, q);
        out.grad += model.backward(im.x_adv, up).d_params;
        break;
      }
      case Objective::Score: {
        const auto im = objectives::inner_max(model, dist, x, cfg.spec, Anchor::Score, cfg.attack);
        out.value += w * im.value;
        const Eigen::Vector2d pd = dist.cond_prob(im.x_adv);
        const Eigen::Vector2d q = model.prob(im.x_adv);
        const Eigen::Vector2d up = w * simplex::grad_q(cfg.spec, pd, q);
        out.grad += model.backward(im.x_adv, up).d_params;
        break;
      }
      case Objective::Trades: {
        const Eigen::Vector2d pd = dist.cond_prob(x);
        const Eigen::Vector2d q0 = model.prob(x);
        const auto im = objectives::inner_max(model, dist, x, cfg.spec, Anchor::Trades, cfg.attack);
        const Eigen::Vector2d qa = model.prob(im.x_adv);
        out.value += w * (simplex::eval(cfg.spec, pd, q0) + cfg.trades.beta * im.value);
        // Both arguments of the self-discrepancy depend on the parameters.
        Eigen::Vector2d up_clean = w * simplex::grad_q(cfg.spec, pd, q0);
        up_clean += (w * cfg.trades.beta) * simplex::grad_p(cfg.spec, q0, qa);
        out.grad += model.backward(x, up_clean).d_params;
        const Eigen::Vector2d up_adv = (w * cfg.trades.beta) * simplex::grad_q(cfg.spec, q0, qa);
        out.grad += model.backward(im.x_adv, up_adv).d_params;
        break;
      }
    }
  }
  return out;
}

TrajectoryRecord make_record(int step, double train_loss, const mlp::MlpModel& model,
                             const toydist::ToyDist& dist, const TrainConfig& cfg,
                             const WeightedPoints& pts, double c_const) {
  // Risks are evaluated with the exact grid solver regardless of the
  // training attack, so recorded bounds live on the shared candidate sets.
  AttackConfig grid_atk{AttackMode::GridExact, 0, 0.0, cfg.attack.ball};
  TrajectoryRecord r;
  r.step = step;
  r.train_loss = train_loss;
  r.r_madry = objectives::loss_madry(model, dist, pts, cfg.spec, grid_atk);
  r.r_score = objectives::loss_score(model, dist, pts, cfg.spec, grid_atk);
  r.c_const = c_const;
  const auto z = objectives::zero_one_errors(model, dist, pts, cfg.attack.ball);
  r.std01 = z.std01;
  r.madry01 = z.madry01;
  r.score01 = z.score01;
  r.thm1_lo_resid = r.r_score - std::abs(r.r_madry - r.c_const);
  r.thm1_hi_resid = r.r_madry + r.c_const - r.r_score;
  return r;
}

void append_num(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  s += buf;
}

}  // namespace

std::string trajectory_csv_header() {
  return "step,train_loss,r_madry,r_score,c_const,std01,madry01,score01,thm1_lo_resid,thm1_hi_resid";
}

std::string trajectory_csv(const std::vector<TrajectoryRecord>& records) {
  std::string s = trajectory_csv_header();
  s += '\n';
  for (const auto& r : records) {
    s += std::to_string(r.step);
    for (double v : {r.train_loss, r.r_madry, r.r_score, r.c_const, r.std01, r.madry01, r.score01,
                     r.thm1_lo_resid, r.thm1_hi_resid}) {
      s += ',';
      append_num(s, v);
    }
    s += '\n';
  }
  return s;
}

TrainResult train(mlp::MlpModel model, const toydist::ToyDist& dist, const TrainConfig& cfg,
                  const RecordHook& on_record) {
  if (cfg.steps < 1) throw std::invalid_argument("train: steps must be >= 1");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (cfg.record_every < 1) throw std::invalid_argument("train: record_every must be >= 1");

  const WeightedPoints pts = batch_points(dist, cfg.batch);
  const double c_const = toydist::constant_c(dist, pts, cfg.attack.ball, cfg.spec);

  TrainResult res;
  const int n_params = model.param_count();
  Eigen::VectorXd theta = model.params();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd buf = Eigen::VectorXd::Zero(n_params);
  int adam_t = 0;

  const auto push_record = [&](int step, double loss) {
    res.records.push_back(make_record(step, loss, model, dist, cfg, pts, c_const));
    if (on_record) on_record(model, res.records.back());
  };

  for (int t = 1; t <= cfg.steps; ++t) {
    const LossGrad lg = eval_loss_grad(model, dist, cfg, pts);
    if (!std::isfinite(lg.value)) {
      res.records.push_back(TrajectoryRecord{t - 1, lg.value, 0, 0, c_const, 0, 0, 0, 0, 0});
      res.aborted = true;
      res.abort_step = t - 1;
      res.model = model;
      return res;
    }
    const auto clipped = objectives::clip_loss(lg.value, cfg.clip);
    if ((t - 1) % cfg.record_every == 0) push_record(t - 1, clipped.value);
    if (clipped.grad_scale > 0.0) {
      if (cfg.optimizer == Optimizer::Adam) {
        ++adam_t;
        m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * lg.grad;
        m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * lg.grad.cwiseProduct(lg.grad);
        const double c1 = 1.0 - std::pow(cfg.beta1, adam_t);
        const double c2 = 1.0 - std::pow(cfg.beta2, adam_t);
        theta -= cfg.lr * (m1 / c1).cwiseQuotient(((m2 / c2).cwiseSqrt().array() + cfg.eps_adam).matrix());
      } else {
        buf = cfg.momentum * buf + lg.grad;
        theta -= cfg.lr * buf;
      }
      model.set_params(theta);
    }
  }

  // Final snapshot at the trained parameters.
  const LossGrad final_lg = eval_loss_grad(model, dist, cfg, pts);
  push_record(cfg.steps, objectives::clip_loss(final_lg.value, cfg.clip).value);
  res.model = std::move(model);
  return res;
}

OnsetResult detect_overfit_onset(const std::vector<TrajectoryRecord>& records, int window) {
  if (records.empty()) throw std::invalid_argument("detect_overfit_onset: empty records");
  if (window < 2) throw std::invalid_argument("detect_overfit_onset: window must be >= 2");
  const int n = static_cast<int>(records.size());
  const int h = window / 2;

  const auto smooth = [&](auto field) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const int lo = std::max(0, j - h), hi = std::min(n - 1, j + h);
      double acc = 0.0;
      for (int k = lo; k <= hi; ++k) acc += field(records[static_cast<std::size_t>(k)]);
      s[static_cast<std::size_t>(j)] = acc / (hi - lo + 1);
    }
    return s;
  };
  const auto sc = smooth([](const TrajectoryRecord& r) { return r.r_score; });
  const auto md = smooth([](const TrajectoryRecord& r) { return r.r_madry; });

  const auto rising = [&](int j) { return sc[j] > sc[j - 1] && md[j] < md[j - 1]; };
  for (int j = 1; j + window - 1 < n; ++j) {
    bool run = true;
    for (int k = j; k < j + window && run; ++k) run = rising(k);
    if (run) {
      OnsetResult r;
      r.found = true;
      r.record_index = j - 1;
      r.step = records[static_cast<std::size_t>(j - 1)].step;
      r.r_madry = records[static_cast<std::size_t>(j - 1)].r_madry;
      return r;
    }
  }
  return {};
}

FiniteSampleRun finite_sample_run(const toydist::ToyDist& dist, int n, std::uint64_t seed,
                                  std::vector<TrainConfig> cfgs, const mlp::MlpModel& init,
                                  int grid_n) {
  if (n < 1) throw std::invalid_argument("finite_sample_run: n must be >= 1");
  FiniteSampleRun out;
  out.samples = toydist::sample_points(dist, n, seed);

  out.grid.resize(grid_n);
  out.eta.resize(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    out.grid[i] = dist.x_lo + (dist.x_hi - dist.x_lo) * i / (grid_n - 1);
    out.eta[i] = dist.eta(out.grid[i]);
  }

  for (auto& cfg : cfgs) {
    cfg.batch.mode = BatchConfig::Mode::Samples;
    cfg.batch.n = n;
    cfg.batch.seed = seed;
    TrainResult r = train(init, dist, cfg);
    Eigen::VectorXd curve(grid_n);
    for (int i = 0; i < grid_n; ++i) curve[i] = r.model.prob(out.grid[i])[1];
    out.eta_hat.push_back(std::move(curve));
    out.results.push_back(std::move(r));
  }
  return out;
}

double sup_gap(const mlp::MlpModel& model, const toydist::ToyDist& dist, int grid_n) {
  double gap = 0.0;
  for (int i = 0; i < grid_n; ++i) {
    const double x = dist.x_lo + (dist.x_hi - dist.x_lo) * i / (grid_n - 1);
    gap = std::max(gap, std::abs(model.prob(x)[1] - dist.eta(x)));
  }
  return gap;
}

}  // namespace scorelab::trainer
