#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scorelab/demos.hpp"

namespace {

using nlohmann::json;

// Defaults, then the demo preset, then SCORE_LAB_OUT, then the config file,
// then flag overrides.
json load_config(const json& preset, const std::string& config_path,
                 const std::vector<std::string>& extras, const std::string& out_flag,
                 long long seed_flag, bool seed_given) {
  json doc = scorelab::config::default_config_json();
  doc.merge_patch(preset);
  if (const char* env_out = std::getenv("SCORE_LAB_OUT"))
    doc["outputs"]["dir"] = std::string(env_out);
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot open config file: " + config_path);
    json file_doc;
    try {
      file_doc = json::parse(f);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    doc.merge_patch(file_doc);
  }
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.find('.') == std::string::npos || i + 1 >= extras.size())
      throw std::runtime_error("unrecognized argument '" + tok +
                               "' (dotted overrides look like --train.lr 0.05)");
    scorelab::config::apply_override(doc, tok.substr(2), extras[++i]);
  }
  if (seed_given) doc["seed"] = seed_flag;
  if (!out_flag.empty()) doc["outputs"]["dir"] = out_flag;
  return doc;
}

int finish(const scorelab::demos::RunResult& res) {
  if (!res.summary.empty()) {
    std::cout << res.summary;
    if (res.summary.back() != '\n') std::cout << '\n';
  }
  for (const auto& p : res.written) std::cout << "wrote " << p << '\n';
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"score-lab: robust-risk toy laboratory (demos, theorem checks, metric sweeps)"};
  app.require_subcommand(1);

  std::string config_path, out_dir, demo_name, verify_scope = "all";
  long long seed = 1;
  int trials = 100;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->allow_extras();  // dotted config overrides, e.g. --train.lr 0.05
  };

  CLI::App* demo = app.add_subcommand("demo", "reproduce a toy figure");
  demo->add_option("name", demo_name, "fig1|fig2|overfit_l2|overfit_kl|gradient_alignment")
      ->required();
  CLI::Option* demo_seed = demo->add_option("--seed", seed, "experiment seed");
  add_common(demo);

  CLI::App* verify = app.add_subcommand("verify", "run theorem verification sweeps");
  verify->add_option("scope", verify_scope, "all|thm1|variants|equiv|cor1|thm4|thm5|klce|gamma");
  verify->add_option("--trials", trials, "random models per exact check");
  CLI::Option* verify_seed = verify->add_option("--seed", seed, "sweep seed");
  add_common(verify);

  CLI::App* sweep = app.add_subcommand("sweep", "loss x learning-rate grid");
  CLI::Option* sweep_seed = sweep->add_option("--seed", seed, "experiment seed");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    const bool seed_given = (active == demo && demo_seed->count()) ||
                            (active == verify && verify_seed->count()) ||
                            (active == sweep && sweep_seed->count());
    const json preset =
        active == demo ? scorelab::demos::demo_preset(demo_name) : json::object();
    const json doc =
        load_config(preset, config_path, active->remaining(), out_dir, seed, seed_given);
    const scorelab::config::ExperimentConfig cfg = scorelab::config::from_json(doc);

    if (active == demo) return finish(scorelab::demos::run_demo(demo_name, cfg, doc));
    if (active == verify)
      return finish(scorelab::demos::run_verify(verify_scope, trials,
                                                static_cast<std::uint64_t>(seed), cfg));
    return finish(scorelab::demos::run_sweep(cfg));
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
