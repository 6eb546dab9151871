#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scorelab/mlp.hpp"
#include "scorelab/objectives.hpp"
#include "scorelab/toydist.hpp"

namespace scorelab::trainer {

enum class Objective { Standard, Madry, Score, Trades };
enum class Optimizer { Adam, SgdMomentum };

struct BatchConfig {
  enum class Mode { FullQuadrature, Samples };
  Mode mode = Mode::FullQuadrature;
  int points = 101;        // quadrature nodes
  int n = 6;               // sample count
  std::uint64_t seed = 0;  // sample seed
};

struct TrainConfig {
  Objective objective = Objective::Score;
  simplex::MetricSpec spec{simplex::Base::SE};
  int steps = 500;
  Optimizer optimizer = Optimizer::Adam;
  double lr = 1e-2;
  double momentum = 0.9;
  double beta1 = 0.9, beta2 = 0.999, eps_adam = 1e-8;
  BatchConfig batch;
  objectives::ClipConfig clip;
  objectives::TradesConfig trades;
  objectives::AttackConfig attack;
  int record_every = 1;
};

// One evaluation snapshot. Risk fields and the smoothness constant are all
// computed on the same points and candidate sets, so for distance metrics
// the two bound residuals stay nonnegative up to rounding.
struct TrajectoryRecord {
  int step = 0;
  double train_loss = 0.0;
  double r_madry = 0.0;
  double r_score = 0.0;
  double c_const = 0.0;
  double std01 = 0.0, madry01 = 0.0, score01 = 0.0;
  double thm1_lo_resid = 0.0;  // r_score - |r_madry - c_const|
  double thm1_hi_resid = 0.0;  // r_madry + c_const - r_score
};

std::string trajectory_csv_header();
std::string trajectory_csv(const std::vector<TrajectoryRecord>& records);

struct TrainResult {
  mlp::MlpModel model;
  std::vector<TrajectoryRecord> records;
  bool aborted = false;
  int abort_step = -1;
};

using RecordHook = std::function<void(const mlp::MlpModel&, const TrajectoryRecord&)>;

// First-order training of the configured objective. The inner maximizer is
// frozen per step (Danskin convention) and gradients flow through the loss
// at that point. Deterministic under fixed seeds; a non-finite loss aborts
// with a final diagnostic record.
TrainResult train(mlp::MlpModel model, const toydist::ToyDist& dist, const TrainConfig& cfg,
                  const RecordHook& on_record = {});

struct OnsetResult {
  bool found = false;
  int step = 0;
  double r_madry = 0.0;
  int record_index = -1;
};

// First record where the smoothed r_score rises for `window` consecutive
// records while the smoothed r_madry falls; reports the record just before
// the rise (the trough). Smoothing is a centered moving average of
// half-width window/2.
OnsetResult detect_overfit_onset(const std::vector<TrajectoryRecord>& records, int window);

struct FiniteSampleRun {
  toydist::WeightedPoints samples;
  std::vector<TrainResult> results;     // one per config, same init, same samples
  Eigen::VectorXd grid;
  Eigen::VectorXd eta;                  // data conditional on the grid
  std::vector<Eigen::VectorXd> eta_hat; // per config, on the grid
};

// Trains every config on the same n seeded draws from the same init and
// tabulates the converged conditionals on an evaluation grid.
FiniteSampleRun finite_sample_run(const toydist::ToyDist& dist, int n, std::uint64_t seed,
                                  std::vector<TrainConfig> cfgs, const mlp::MlpModel& init,
                                  int grid_n = 201);

// max over a uniform grid of |eta_hat - eta|.
double sup_gap(const mlp::MlpModel& model, const toydist::ToyDist& dist, int grid_n = 201);

}  // namespace scorelab::trainer
