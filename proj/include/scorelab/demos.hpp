#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "scorelab/config.hpp"

namespace scorelab::demos {

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> written;  // artifact paths
  std::string summary;               // printed on stdout
};

// Per-demo config patch (ball radius, learning rate, metric) applied on top
// of the defaults and below any user config, so every figure regime is
// reproducible from a bare `demo <name>` invocation.
nlohmann::json demo_preset(const std::string& name);

// fig1 | fig2 | overfit_l2 | overfit_kl | gradient_alignment.
RunResult run_demo(const std::string& name, const config::ExperimentConfig& cfg,
                   const nlohmann::json& cfg_json);

RunResult run_sweep(const config::ExperimentConfig& cfg);

// Verification front end over the theorem scopes; writes a JSONL report and
// returns exit 1 with the first failing report echoed in the summary.
RunResult run_verify(const std::string& scope, int trials, std::uint64_t seed,
                     const config::ExperimentConfig& cfg);

}  // namespace scorelab::demos
