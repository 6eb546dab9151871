#include "scorelab/config.hpp"

#include <algorithm>

namespace scorelab::config {

namespace {

using nlohmann::json;

trainer::Objective objective_from(const std::string& s) {
  if (s == "standard") return trainer::Objective::Standard;
  if (s == "madry") return trainer::Objective::Madry;
  if (s == "score") return trainer::Objective::Score;
  if (s == "trades") return trainer::Objective::Trades;
  throw std::invalid_argument("config: unknown objective '" + s + "'");
}

std::string objective_name(trainer::Objective o) {
  switch (o) {
    case trainer::Objective::Standard: return "standard";
    case trainer::Objective::Madry: return "madry";
    case trainer::Objective::Score: return "score";
    case trainer::Objective::Trades: return "trades";
  }
  return "?";
}

}  // namespace

bool OutputConfig::wants(const std::string& fmt) const {
  return std::find(formats.begin(), formats.end(), fmt) != formats.end();
}

json spec_to_json(const simplex::MetricSpec& s) { return s.name(); }

simplex::MetricSpec spec_from_json(const json& j) {
  if (j.is_string()) return simplex::MetricSpec::parse(j.get<std::string>());
  simplex::MetricSpec s = simplex::MetricSpec::parse(j.at("base").get<std::string>());
  if (j.value("phi", "identity") == "square") s = simplex::MetricSpec(s.base, simplex::Phi::Square);
  return s;
}

json dist_to_json(const toydist::ToyDist& d) {
  json j;
  j["support"] = {d.x_lo, d.x_hi};
  switch (d.kind) {
    case toydist::Kind::SmoothSineEta:
      j["kind"] = "smooth_sine";
      j["amplitude"] = d.amplitude;
      j["angular_freq"] = d.angular_freq;
      break;
    case toydist::Kind::PiecewiseLinearEta:
      j["kind"] = "piecewise_linear";
      j["knot_x"] = d.knot_x;
      j["knot_eta"] = d.knot_eta;
      break;
    case toydist::Kind::GaussianPair:
      j["kind"] = "gaussian_pair";
      j["mu0"] = d.mu0;
      j["s2"] = d.s2;
      j["pi1"] = d.pi1;
      break;
  }
  return j;
}

toydist::ToyDist dist_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  double lo = -4.0, hi = 4.0;
  if (j.contains("support")) {
    lo = j["support"].at(0).get<double>();
    hi = j["support"].at(1).get<double>();
  }
  if (kind == "smooth_sine")
    return toydist::ToyDist::smooth_sine(j.value("amplitude", 0.4),
                                         j.value("angular_freq", 1.5707963267948966), lo, hi);
  if (kind == "piecewise_linear")
    return toydist::ToyDist::piecewise_linear(j.at("knot_x").get<std::vector<double>>(),
                                              j.at("knot_eta").get<std::vector<double>>());
  if (kind == "gaussian_pair")
    return toydist::ToyDist::gaussian_pair(j.value("mu0", 1.0), j.value("s2", 1.0),
                                           j.value("pi1", 0.5), lo, hi);
  throw std::invalid_argument("config: unknown distribution kind '" + kind + "'");
}

json default_config_json() {
  json j;
  j["seed"] = 2;
  j["distribution"] = dist_to_json(toydist::ToyDist::smooth_sine());
  j["ball"] = {{"epsilon", 1.0}, {"grid_points", 41}};
  j["model"] = {{"hidden", 32}, {"activation", "tanh"}, {"prob_floor", 1e-7}};
  j["train"] = {{"objective", "score"},
                {"spec", "se"},
                {"steps", 500},
                {"optimizer", "adam"},
                {"lr", 0.01},
                {"momentum", 0.9},
                {"beta1", 0.9},
                {"beta2", 0.999},
                {"eps_adam", 1e-8},
                {"batch", {{"mode", "full_quadrature"}, {"points", 101}, {"n", 6}, {"seed", 0}}},
                {"clip", {{"enabled", false}, {"threshold", 0.4}}},
                {"trades", {{"beta", 6.0}}},
                {"record_every", 1}};
  j["attack"] = {{"mode", "grid_exact"}, {"steps", 10}, {"step_size", 0.25}};
  j["sweep"] = {{"losses", {"l2", "l1", "linf", "jsdist", "jsdiv", "kl", "sql1", "se"}},
                {"lrs", {0.1, 0.05, 0.01}},
                {"objective", "madry"},
                {"steps", 300},
                {"points", 65}};
  j["onset_window"] = 5;
  j["outputs"] = {{"dir", "out"}, {"formats", {"csv", "svg", "jsonl"}}};
  return j;
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("distribution")) cfg.distribution = dist_from_json(j["distribution"]);
  else cfg.distribution = toydist::ToyDist::smooth_sine();

  const json jb = j.value("ball", json::object());
  cfg.ball = toydist::PerturbBall(jb.value("epsilon", 1.0), jb.value("grid_points", 41));

  const json jm = j.value("model", json::object());
  cfg.model.hidden = jm.value("hidden", 32);
  cfg.model.activation =
      jm.value("activation", "tanh") == "relu" ? mlp::Activation::ReLU : mlp::Activation::Tanh;
  cfg.model.prob_floor = jm.value("prob_floor", 1e-7);

  const json jt = j.value("train", json::object());
  cfg.train.objective = objective_from(jt.value("objective", "score"));
  cfg.train.spec = jt.contains("spec") ? spec_from_json(jt["spec"]) : simplex::MetricSpec(simplex::Base::SE);
  cfg.train.steps = jt.value("steps", 500);
  cfg.train.optimizer = jt.value("optimizer", "adam") == "sgd_momentum"
                            ? trainer::Optimizer::SgdMomentum
                            : trainer::Optimizer::Adam;
  cfg.train.lr = jt.value("lr", 0.01);
  cfg.train.momentum = jt.value("momentum", 0.9);
  cfg.train.beta1 = jt.value("beta1", 0.9);
  cfg.train.beta2 = jt.value("beta2", 0.999);
  cfg.train.eps_adam = jt.value("eps_adam", 1e-8);
  const json jbt = jt.value("batch", json::object());
  cfg.train.batch.mode = jbt.value("mode", "full_quadrature") == "samples"
                             ? trainer::BatchConfig::Mode::Samples
                             : trainer::BatchConfig::Mode::FullQuadrature;
  cfg.train.batch.points = jbt.value("points", 101);
  cfg.train.batch.n = jbt.value("n", 6);
  cfg.train.batch.seed = jbt.value("seed", std::uint64_t{0});
  const json jc = jt.value("clip", json::object());
  cfg.train.clip.enabled = jc.value("enabled", false);
  cfg.train.clip.threshold = jc.value("threshold", 0.4);
  cfg.train.trades.beta = jt.value("trades", json::object()).value("beta", 6.0);
  cfg.train.record_every = jt.value("record_every", 1);

  const json ja = j.value("attack", json::object());
  cfg.train.attack.mode = ja.value("mode", "grid_exact") == "pgd" ? objectives::AttackMode::PGD
                                                                  : objectives::AttackMode::GridExact;
  cfg.train.attack.steps = ja.value("steps", 10);
  cfg.train.attack.step_size = ja.value("step_size", 0.25);
  cfg.train.attack.ball = cfg.ball;

  const json js = j.value("sweep", json::object());
  for (const auto& l : js.value("losses", std::vector<std::string>{"l2", "l1", "linf", "jsdist",
                                                                   "jsdiv", "kl", "sql1", "se"}))
    cfg.sweep.losses.push_back(simplex::MetricSpec::parse(l));
  cfg.sweep.lrs = js.value("lrs", std::vector<double>{0.1, 0.05, 0.01});
  cfg.sweep.objective = objective_from(js.value("objective", "madry"));
  cfg.sweep.steps = js.value("steps", 300);
  cfg.sweep.points = js.value("points", 65);

  cfg.onset_window = j.value("onset_window", 5);

  const json jo = j.value("outputs", json::object());
  cfg.outputs.dir = jo.value("dir", "out");
  cfg.outputs.formats = jo.value("formats", std::vector<std::string>{"csv", "svg", "jsonl"});
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j = default_config_json();
  j["seed"] = cfg.seed;
  j["distribution"] = dist_to_json(cfg.distribution);
  j["ball"] = {{"epsilon", cfg.ball.epsilon}, {"grid_points", cfg.ball.grid_points}};
  j["model"] = {{"hidden", cfg.model.hidden},
                {"activation", cfg.model.activation == mlp::Activation::ReLU ? "relu" : "tanh"},
                {"prob_floor", cfg.model.prob_floor}};
  j["train"]["objective"] = objective_name(cfg.train.objective);
  j["train"]["spec"] = spec_to_json(cfg.train.spec);
  j["train"]["steps"] = cfg.train.steps;
  j["train"]["optimizer"] =
      cfg.train.optimizer == trainer::Optimizer::SgdMomentum ? "sgd_momentum" : "adam";
  j["train"]["lr"] = cfg.train.lr;
  j["train"]["momentum"] = cfg.train.momentum;
  j["train"]["beta1"] = cfg.train.beta1;
  j["train"]["beta2"] = cfg.train.beta2;
  j["train"]["eps_adam"] = cfg.train.eps_adam;
  j["train"]["batch"] = {
      {"mode", cfg.train.batch.mode == trainer::BatchConfig::Mode::Samples ? "samples" : "full_quadrature"},
      {"points", cfg.train.batch.points},
      {"n", cfg.train.batch.n},
      {"seed", cfg.train.batch.seed}};
  j["train"]["clip"] = {{"enabled", cfg.train.clip.enabled}, {"threshold", cfg.train.clip.threshold}};
  j["train"]["trades"] = {{"beta", cfg.train.trades.beta}};
  j["train"]["record_every"] = cfg.train.record_every;
  j["attack"] = {{"mode", cfg.train.attack.mode == objectives::AttackMode::PGD ? "pgd" : "grid_exact"},
                 {"steps", cfg.train.attack.steps},
                 {"step_size", cfg.train.attack.step_size}};
  json losses = json::array();
  for (const auto& l : cfg.sweep.losses) losses.push_back(l.name());
  j["sweep"] = {{"losses", losses},
                {"lrs", cfg.sweep.lrs},
                {"objective", objective_name(cfg.sweep.objective)},
                {"steps", cfg.sweep.steps},
                {"points", cfg.sweep.points}};
  j["onset_window"] = cfg.onset_window;
  j["outputs"] = {{"dir", cfg.outputs.dir}, {"formats", cfg.outputs.formats}};
  return j;
}

void apply_override(json& doc, const std::string& dotted_path, const std::string& value) {
  std::string pointer = "/";
  for (char c : dotted_path) pointer += (c == '.') ? '/' : c;
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare string
  }
  doc[json::json_pointer(pointer)] = parsed;
}

mlp::MlpModel make_model(const ExperimentConfig& cfg) {
  mlp::MlpModel m = mlp::MlpModel::init({1, cfg.model.hidden, cfg.model.hidden, 1},
                                        cfg.model.activation, cfg.seed);
  m.set_prob_floor(cfg.model.prob_floor);
  return m;
}

}  // namespace scorelab::config
