/*
 * Copyright 2026 The blecc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "blecc/blecc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSimulation = 2;

int exit_code(blecc_status status) {
  switch (status) {
    case BLECC_OK: return kExitOk;
    case BLECC_ERR_CONFIG: return kExitConfig;
    default: return kExitSimulation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs covert-channel transfer scenarios over a simulated BLE advertising medium."};
  app.set_version_flag("--version", std::string(blecc_version()));

  std::string scenario_path;
  std::string out_dir = "out";
  bool trace = false;
  bool dump_pdus = false;
  bool require_complete = false;
  std::optional<std::uint64_t> seed_override;
  unsigned threads = 0;

  app.add_option("--scenario", scenario_path, "Scenario INI file")->required();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_flag("--trace", trace, "Write trace.log");
  app.add_flag("--dump-pdus", dump_pdus, "Write one hexdump file per run under pdus/");
  app.add_flag("--require-complete", require_complete, "Exit 2 if any transfer does not complete");
  app.add_option("--seed-override", seed_override, "Run only this seed");
  app.add_option("--threads", threads, "Parallel runs (0 = one per core)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  blecc_scenario* scenario = nullptr;
  blecc_status status = blecc_scenario_load(scenario_path.c_str(), &scenario);
  if (status != BLECC_OK) {
    std::fprintf(stderr, "error: %s\n", blecc_last_error());
    return exit_code(status);
  }
  if (seed_override) {
    status = blecc_scenario_override_seed(scenario, *seed_override);
    if (status != BLECC_OK) {
      std::fprintf(stderr, "error: %s\n", blecc_last_error());
      blecc_scenario_free(scenario);
      return exit_code(status);
    }
  }

  const blecc_run_options options{out_dir.c_str(), trace ? 1 : 0, dump_pdus ? 1 : 0, require_complete ? 1 : 0,
                                  threads};
  blecc_run_summary summary{};
  status = blecc_scenario_run(scenario, &options, &summary);
  blecc_scenario_free(scenario);
  if (status != BLECC_OK) {
    std::fprintf(stderr, "error: %s\n", blecc_last_error());
    return exit_code(status);
  }
  std::printf("%zu runs, %zu complete, results in %s\n", summary.runs, summary.complete, out_dir.c_str());
  return kExitOk;
}
