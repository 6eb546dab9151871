#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "scorelab/mlp.hpp"
#include "scorelab/toydist.hpp"
#include "scorelab/trainer.hpp"

namespace scorelab::config {

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "svg", "jsonl"};
  bool wants(const std::string& fmt) const;
};

struct ModelConfig {
  int hidden = 32;
  mlp::Activation activation = mlp::Activation::Tanh;
  double prob_floor = 1e-7;
};

struct SweepSpec {
  std::vector<simplex::MetricSpec> losses;
  std::vector<double> lrs;
  trainer::Objective objective = trainer::Objective::Madry;
  int steps = 300;
  int points = 65;
};

// One experiment: distribution, ball, model, training recipe, outputs.
// The ball is shared by training, recorded risks and the 0-1 criteria.
struct ExperimentConfig {
  toydist::ToyDist distribution;
  toydist::PerturbBall ball;
  ModelConfig model;
  trainer::TrainConfig train;
  SweepSpec sweep;
  int onset_window = 5;
  OutputConfig outputs;
  std::uint64_t seed = 1;
};

nlohmann::json default_config_json();
ExperimentConfig from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

// "train.lr" -> /train/lr; the value is parsed as JSON when possible and
// kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& dotted_path, const std::string& value);

mlp::MlpModel make_model(const ExperimentConfig& cfg);

nlohmann::json dist_to_json(const toydist::ToyDist& d);
toydist::ToyDist dist_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const simplex::MetricSpec& s);
simplex::MetricSpec spec_from_json(const nlohmann::json& j);

}  // namespace scorelab::config
