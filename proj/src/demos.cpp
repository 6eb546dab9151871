#include "scorelab/demos.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "scorelab/svg.hpp"
#include "scorelab/theorems.hpp"

namespace scorelab::demos {

namespace {

namespace fs = std::filesystem;
using config::ExperimentConfig;
using objectives::AttackConfig;
using objectives::AttackMode;
using toydist::WeightedPoints;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content,
                std::vector<std::string>& written) {
  svg::write_file(path, content);
  written.push_back(path);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.outputs.dir);
  return (fs::path(cfg.outputs.dir) / file).string();
}

Eigen::VectorXd eval_grid(const toydist::ToyDist& dist, int n) {
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = dist.x_lo + (dist.x_hi - dist.x_lo) * i / (n - 1);
  return g;
}

svg::Series curve_of(const std::string& label, const Eigen::VectorXd& xs,
                     const Eigen::VectorXd& ys, const std::string& color) {
  svg::Series s;
  s.label = label;
  s.color = color;
  s.x.assign(xs.data(), xs.data() + xs.size());
  s.y.assign(ys.data(), ys.data() + ys.size());
  return s;
}

struct NamedRun {
  std::string tag;
  trainer::TrainConfig cfg;
};

// The three objectives compared in the conditional-fit figures.
std::vector<NamedRun> figure_runs(const ExperimentConfig& cfg) {
  trainer::TrainConfig base = cfg.train;
  NamedRun standard{"standard_kl", base};
  standard.cfg.objective = trainer::Objective::Standard;
  standard.cfg.spec = simplex::MetricSpec(simplex::Base::KL);
  NamedRun madry{"madry_kl", base};
  madry.cfg.objective = trainer::Objective::Madry;
  madry.cfg.spec = simplex::MetricSpec(simplex::Base::KL);
  NamedRun score{"score_" + cfg.train.spec.name(), base};
  score.cfg.objective = trainer::Objective::Score;
  return {standard, madry, score};
}

RunResult demo_conditional_fit(const std::string& name, const ExperimentConfig& cfg,
                               const nlohmann::json& cfg_json) {
  RunResult res;
  const bool finite_sample = name == "fig2";
  const std::vector<NamedRun> runs = figure_runs(cfg);
  const mlp::MlpModel init = config::make_model(cfg);

  svg::Figure fig;
  fig.title = finite_sample ? "Converged conditionals, " + std::to_string(cfg.train.batch.n) +
                                  " training pairs"
                            : "Converged conditionals, expectation regime";
  fig.xlabel = "x";
  fig.ylabel = "p(y=1|x)";
  fig.comment = "config: " + cfg_json.dump();
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  std::string gaps;

  if (finite_sample) {
    std::vector<trainer::TrainConfig> cfgs;
    for (const auto& run : runs) cfgs.push_back(run.cfg);
    const trainer::FiniteSampleRun fsr =
        trainer::finite_sample_run(cfg.distribution, cfg.train.batch.n, cfg.seed, cfgs, init, 201);
    fig.series.push_back(curve_of("data conditional", fsr.grid, fsr.eta, "#000000"));
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const trainer::TrainResult& tr = fsr.results[k];
      if (tr.aborted) {
        res.exit_code = 3;
        res.summary =
            "non-finite loss in run " + runs[k].tag + " at step " + std::to_string(tr.abort_step);
        return res;
      }
      if (cfg.outputs.wants("csv"))
        write_text(out_path(cfg, name + "_" + runs[k].tag + "_trajectory.csv"),
                   trainer::trajectory_csv(tr.records), res.written);
      fig.series.push_back(curve_of(runs[k].tag, fsr.grid, fsr.eta_hat[k], colors[k % 3]));
      gaps += runs[k].tag + " sup_gap=" + num(trainer::sup_gap(tr.model, cfg.distribution)) + "\n";
    }
    svg::Series pts;
    pts.label = "training x";
    pts.color = "#9467bd";
    pts.scatter = true;
    for (Eigen::Index i = 0; i < fsr.samples.size(); ++i) {
      pts.x.push_back(fsr.samples.xs[i]);
      pts.y.push_back(cfg.distribution.eta(fsr.samples.xs[i]));
    }
    fig.series.push_back(pts);
  } else {
    const Eigen::VectorXd grid = eval_grid(cfg.distribution, 201);
    Eigen::VectorXd eta(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) eta[i] = cfg.distribution.eta(grid[i]);
    fig.series.push_back(curve_of("data conditional", grid, eta, "#000000"));
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const trainer::TrainResult tr = trainer::train(init, cfg.distribution, runs[k].cfg);
      if (tr.aborted) {
        res.exit_code = 3;
        res.summary =
            "non-finite loss in run " + runs[k].tag + " at step " + std::to_string(tr.abort_step);
        return res;
      }
      if (cfg.outputs.wants("csv"))
        write_text(out_path(cfg, name + "_" + runs[k].tag + "_trajectory.csv"),
                   trainer::trajectory_csv(tr.records), res.written);
      Eigen::VectorXd fit(grid.size());
      for (Eigen::Index i = 0; i < grid.size(); ++i) fit[i] = tr.model.prob(grid[i])[1];
      fig.series.push_back(curve_of(runs[k].tag, grid, fit, colors[k % 3]));
      gaps += runs[k].tag + " sup_gap=" + num(trainer::sup_gap(tr.model, cfg.distribution)) + "\n";
    }
  }
  if (cfg.outputs.wants("svg"))
    write_text(out_path(cfg, name + "_curves.svg"), svg::render(fig), res.written);
  res.summary = gaps;
  return res;
}

RunResult demo_overfit(const std::string& name, const ExperimentConfig& cfg,
                       const nlohmann::json& cfg_json) {
  RunResult res;
  trainer::TrainConfig tc = cfg.train;
  tc.objective = trainer::Objective::Madry;
  tc.spec = simplex::MetricSpec(name == "overfit_kl" ? simplex::Base::KL : simplex::Base::L2);

  const trainer::TrainResult tr = trainer::train(config::make_model(cfg), cfg.distribution, tc);
  if (tr.aborted) {
    res.exit_code = 3;
    res.summary = "non-finite loss at step " + std::to_string(tr.abort_step);
    return res;
  }
  if (cfg.outputs.wants("csv"))
    write_text(out_path(cfg, name + "_trajectory.csv"), trainer::trajectory_csv(tr.records),
               res.written);

  const auto onset = trainer::detect_overfit_onset(tr.records, cfg.onset_window);
  const double c_const = tr.records.front().c_const;

  svg::Figure fig;
  fig.title = "Robust risks while minimizing the " + tc.spec.name() + " worst-case loss";
  fig.xlabel = "step";
  fig.ylabel = "risk";
  fig.comment = "config: " + cfg_json.dump();
  svg::Series madry, score;
  madry.label = "r_madry[" + tc.spec.name() + "]";
  madry.color = "#1f77b4";
  score.label = "r_score[" + tc.spec.name() + "]";
  score.color = "#d62728";
  for (const auto& r : tr.records) {
    madry.x.push_back(r.step);
    madry.y.push_back(r.r_madry);
    score.x.push_back(r.step);
    score.y.push_back(r.r_score);
  }
  fig.series = {madry, score};
  fig.hlines.push_back({c_const, "C[" + tc.spec.name() + "]=" + num(c_const), "#7f7f7f"});
  if (onset.found) fig.vlines.push_back({double(onset.step), "onset", "#2ca02c"});
  if (cfg.outputs.wants("svg"))
    write_text(out_path(cfg, name + ".svg"), svg::render(fig), res.written);

  if (onset.found)
    res.summary = "onset step=" + std::to_string(onset.step) + " r_madry=" + num(onset.r_madry) +
                  " C=" + num(c_const) + " ratio=" + num(onset.r_madry / c_const) + "\n";
  else
    res.summary = "no overfitting onset detected; C=" + num(c_const) + "\n";
  return res;
}

RunResult demo_gradient_alignment(const ExperimentConfig& cfg, const nlohmann::json& cfg_json) {
  RunResult res;
  trainer::TrainConfig tc = cfg.train;
  tc.objective = trainer::Objective::Madry;
  tc.spec = simplex::MetricSpec(simplex::Base::KL);

  const simplex::MetricSpec l1{simplex::Base::L1};
  const WeightedPoints pts =
      tc.batch.mode == trainer::BatchConfig::Mode::Samples
          ? toydist::sample_points(cfg.distribution, tc.batch.n, tc.batch.seed)
          : toydist::quadrature_points(cfg.distribution, tc.batch.points);
  const AttackConfig grid_atk{AttackMode::GridExact, 0, 0.0, cfg.ball};
  const double c_l1 = toydist::constant_c(cfg.distribution, pts, cfg.ball, l1);

  std::string csv = "step,r_score_l1,r_std_l1,gap,first_order_term\n";
  svg::Series gap_series, term_series, score_series;
  gap_series.label = "r_score_l1 - r_std_l1";
  gap_series.color = "#1f77b4";
  term_series.label = "2 eps E|d eta - d eta_hat|";
  term_series.color = "#d62728";
  score_series.label = "r_score_l1";
  score_series.color = "#2ca02c";

  const auto hook = [&](const mlp::MlpModel& model, const trainer::TrajectoryRecord& rec) {
    const double r_score = objectives::loss_score(model, cfg.distribution, pts, l1, grid_atk);
    const double r_std = objectives::loss_standard(model, cfg.distribution, pts, l1);
    double term = 0.0;
    for (Eigen::Index i = 0; i < pts.size(); ++i) {
      const double x = pts.xs[i];
      const int yd = cfg.distribution.hard_label(x);
      const double d_data = (yd == 1 ? 1.0 : -1.0) * cfg.distribution.eta_prime(x);
      term += pts.ws[i] * std::abs(d_data - model.prob_input_grad(x)[yd]);
    }
    term *= 2.0 * cfg.ball.epsilon;
    csv += std::to_string(rec.step) + "," + num(r_score) + "," + num(r_std) + "," +
           num(r_score - r_std) + "," + num(term) + "\n";
    gap_series.x.push_back(rec.step);
    gap_series.y.push_back(r_score - r_std);
    term_series.x.push_back(rec.step);
    term_series.y.push_back(term);
    score_series.x.push_back(rec.step);
    score_series.y.push_back(r_score);
  };

  const trainer::TrainResult tr = trainer::train(config::make_model(cfg), cfg.distribution, tc, hook);
  if (tr.aborted) {
    res.exit_code = 3;
    res.summary = "non-finite loss at step " + std::to_string(tr.abort_step);
    return res;
  }
  if (cfg.outputs.wants("csv"))
    write_text(out_path(cfg, "gradient_alignment.csv"), csv, res.written);

  svg::Figure fig;
  fig.title = "Gradient alignment term while minimizing the KL worst-case loss";
  fig.xlabel = "step";
  fig.ylabel = "value";
  fig.comment = "config: " + cfg_json.dump();
  fig.series = {score_series, gap_series, term_series};
  fig.hlines.push_back({c_l1, "C[l1]=" + num(c_l1), "#7f7f7f"});
  if (cfg.outputs.wants("svg"))
    write_text(out_path(cfg, "gradient_alignment.svg"), svg::render(fig), res.written);
  res.summary = "final alignment term=" + num(term_series.y.empty() ? 0.0 : term_series.y.back()) + "\n";
  return res;
}

}  // namespace

nlohmann::json demo_preset(const std::string& name) {
  using nlohmann::json;
  // Calibrated toy regimes. The expectation-regime fits need a faster Adam
  // rate to converge inside 500 steps; the overfitting demos need a ball
  // small enough that the smoothness constant sits below the initial risk,
  // or the crossing never happens.
  if (name == "fig1") return json{{"train", {{"lr", 0.03}}}};
  if (name == "fig2")
    return json{{"train", {{"lr", 0.03}, {"batch", {{"mode", "samples"}, {"n", 6}}}}}};
  if (name == "overfit_l2")
    return json{{"ball", {{"epsilon", 0.35}}},
                {"train", {{"lr", 0.01}, {"objective", "madry"}, {"spec", "l2"}}}};
  if (name == "overfit_kl")
    return json{{"ball", {{"epsilon", 0.52}}},
                {"train", {{"lr", 0.01}, {"objective", "madry"}, {"spec", "kl"}}}};
  if (name == "gradient_alignment")
    return json{{"ball", {{"epsilon", 0.52}}},
                {"train", {{"lr", 0.01}, {"objective", "madry"}, {"spec", "kl"}}}};
  return json::object();
}

RunResult run_demo(const std::string& name, const ExperimentConfig& cfg,
                   const nlohmann::json& cfg_json) {
  if (name == "fig1" || name == "fig2") return demo_conditional_fit(name, cfg, cfg_json);
  if (name == "overfit_l2" || name == "overfit_kl") return demo_overfit(name, cfg, cfg_json);
  if (name == "gradient_alignment") return demo_gradient_alignment(cfg, cfg_json);
  RunResult res;
  res.exit_code = 2;
  res.summary = "unknown demo '" + name + "'";
  return res;
}

RunResult run_sweep(const config::ExperimentConfig& cfg) {
  RunResult res;
  if (cfg.sweep.losses.empty() || cfg.sweep.lrs.empty()) {
    res.exit_code = 2;
    res.summary = "sweep: empty loss or lr grid";
    return res;
  }

  struct Row {
    std::string loss;
    double lr, clean01, robust01;
  };
  std::vector<Row> rows;
  const mlp::MlpModel init = config::make_model(cfg);
  for (const auto& loss : cfg.sweep.losses) {
    for (double lr : cfg.sweep.lrs) {
      trainer::TrainConfig tc = cfg.train;
      tc.objective = cfg.sweep.objective;
      tc.spec = loss;
      tc.lr = lr;
      tc.steps = cfg.sweep.steps;
      tc.batch.mode = trainer::BatchConfig::Mode::FullQuadrature;
      tc.batch.points = cfg.sweep.points;
      tc.record_every = cfg.sweep.steps + 1;  // only the endpoint snapshots
      Row row{loss.name(), lr, std::nan(""), std::nan("")};
      try {
        const trainer::TrainResult tr = trainer::train(init, cfg.distribution, tc);
        if (!tr.aborted) {
          row.clean01 = tr.records.back().std01;
          row.robust01 = tr.records.back().madry01;
        }
      } catch (const std::exception&) {
        // keep the NaN row; one failed cell must not kill the sweep
      }
      rows.push_back(row);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.loss != b.loss ? a.loss < b.loss : a.lr < b.lr;
  });
  std::string csv = "loss,lr,clean01,robust01\n";
  for (const auto& r : rows)
    csv += r.loss + "," + num(r.lr) + "," + num(r.clean01) + "," + num(r.robust01) + "\n";
  write_text(out_path(cfg, "sweep.csv"), csv, res.written);
  res.summary = std::to_string(rows.size()) + " sweep rows written\n";
  return res;
}

RunResult run_verify(const std::string& scope, int trials, std::uint64_t seed,
                     const config::ExperimentConfig& cfg) {
  RunResult res;
  theorems::VerifySetup setup = theorems::default_verify_setup();
  setup.dist = cfg.distribution;
  setup.ball = cfg.ball;

  std::vector<theorems::BoundReport> reports;
  try {
    reports = theorems::run_verify_scope(scope, setup, trials, seed);
  } catch (const std::invalid_argument& e) {
    res.exit_code = 2;
    res.summary = e.what();
    return res;
  }
  if (cfg.outputs.wants("jsonl"))
    write_text(out_path(cfg, "verify_" + scope + ".jsonl"), theorems::to_jsonl(reports),
               res.written);

  int passed = 0;
  const theorems::BoundReport* first_fail = nullptr;
  for (const auto& r : reports) {
    if (r.pass) ++passed;
    else if (!first_fail) first_fail = &r;
  }
  res.summary = "passed " + std::to_string(passed) + "/" + std::to_string(reports.size()) + "\n";
  if (first_fail) {
    res.exit_code = 1;
    res.summary += "first failure: " + theorems::to_json(*first_fail).dump() + "\n";
  }
  return res;
}

}  // namespace scorelab::demos
