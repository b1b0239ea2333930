/*
 * Copyright (c) 2026 The ringforest Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end. Talks to the library only through ringforest.h.

#include "ringforest/ringforest.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

namespace
{

enum Exit
{
  ExitOk = 0,
  ExitError = 1,
  ExitInvariant = 2,
  ExitMismatch = 3,
};

int report(rf_status st, const char *what)
{
  if (st == RF_OK)
    return ExitOk;
  std::fprintf(stderr, "ringforest: %s: %s error: %s\n", what, rf_status_name(st), rf_last_error());
  return st == RF_E_INVARIANT ? ExitInvariant : ExitError;
}

struct Overrides
{
  std::string seed;
  std::string policy;
  bool trace = false;
};

int load(const std::string &path, const Overrides &o, rf_scenario **s)
{
  if (int rc = report(rf_scenario_load(path.c_str(), s), "load"))
    return rc;
  rf_status st = RF_OK;
  if (!o.seed.empty())
    st = rf_scenario_set(*s, "seed", o.seed.c_str());
  if (st == RF_OK && !o.policy.empty())
  {
    st = rf_scenario_set(*s, "game.enabled", "true");
    if (st == RF_OK)
      st = rf_scenario_set(*s, "game.policy", o.policy.c_str());
  }
  if (st == RF_OK && o.trace)
    st = rf_scenario_set(*s, "trace", "true");
  if (st != RF_OK)
  {
    rf_scenario_free(*s);
    *s = nullptr;
  }
  return report(st, "override");
}

int cmd_run(const std::string &path, const std::string &out, const Overrides &o)
{
  rf_scenario *s = nullptr;
  if (int rc = load(path, o, &s))
    return rc;
  rf_result *r = nullptr;
  int rc = report(rf_run(s, &r), "run");
  if (rc == ExitOk)
    rc = report(rf_result_emit(r, s, out.c_str()), "emit");
  if (rc == ExitOk)
  {
    char *summary = nullptr;
    rc = report(rf_result_summary(r, &summary), "summary");
    if (rc == ExitOk)
      std::printf("%s\n", summary);
    rf_free(summary);
  }
  rf_result_free(r);
  rf_scenario_free(s);
  return rc;
}

int cmd_sweep(const std::string &path, const std::string &vary, const std::string &out, int threads,
              const Overrides &o)
{
  const auto eq = vary.find('=');
  if (eq == std::string::npos || eq == 0)
  {
    std::fprintf(stderr, "ringforest: sweep: --vary expects key=v1,v2,...\n");
    return ExitError;
  }
  rf_scenario *s = nullptr;
  if (int rc = load(path, o, &s))
    return rc;
  char *rep = nullptr;
  size_t failures = 0;
  const std::string key = vary.substr(0, eq);
  const std::string values = vary.substr(eq + 1);
  int rc = report(rf_sweep(s, key.c_str(), values.c_str(), out.c_str(), threads, &rep, &failures),
                  "sweep");
  if (rc == ExitOk)
  {
    std::printf("value\tdir\terror\n%s", rep);
    if (failures)
      rc = ExitInvariant;
  }
  rf_free(rep);
  rf_scenario_free(s);
  return rc;
}

int cmd_overlay_check(const std::string &dump)
{
  char *v = nullptr;
  size_t n = 0;
  int rc = report(rf_overlay_check(dump.c_str(), &v, &n), "overlay-check");
  if (rc == ExitOk)
  {
    if (n)
    {
      std::printf("%s", v);
      rc = ExitInvariant;
    }
    std::printf("%zu violation(s)\n", n);
  }
  rf_free(v);
  return rc;
}

int cmd_regret_eval(const std::string &history, std::string model)
{
  if (model.empty())
    model = (std::filesystem::path(history).parent_path() / "model.json").string();
  double *series = nullptr;
  size_t len = 0;
  const int rc = report(rf_regret_eval(history.c_str(), model.c_str(), &series, &len), "regret-eval");
  if (rc == ExitOk)
  {
    std::printf("episode,cumulative_regret\n");
    for (size_t k = 0; k < len; ++k)
      std::printf("%zu,%.17g\n", k, series[k]);
  }
  rf_free(series);
  return rc;
}

int cmd_replay(const std::string &manifest, const std::string &out)
{
  char *bad = nullptr;
  size_t n = 0;
  int rc = report(rf_replay(manifest.c_str(), out.c_str(), &bad, &n), "replay");
  if (rc == ExitOk)
  {
    if (n)
    {
      std::printf("%s", bad);
      rc = ExitMismatch;
    }
    std::printf("%zu mismatching file(s)\n", n);
  }
  rf_free(bad);
  return rc;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"ringforest: overlay, forest and routing-game simulator"};
  app.set_version_flag("--version", rf_version());
  app.require_subcommand(1);

  Overrides o;
  std::string out = "out";
  std::uint64_t seed = 0;
  auto *seed_opt = app.add_option("--seed", seed, "override the scenario seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--policy", o.policy, "routing policy; enables the game phase")
      ->check(CLI::IsMember({"algorithm1", "bandit", "opt", "multicast"}));
  app.add_flag("--trace", o.trace, "write the event trace");
  app.fallthrough();

  std::string scenario, vary, dump, history, model, manifest;
  int threads = 4;

  auto *run = app.add_subcommand("run", "run a scenario and write metrics");
  run->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);

  auto *sw = app.add_subcommand("sweep", "run a scenario once per value of one key");
  sw->add_option("scenario", scenario)->required()->check(CLI::ExistingFile);
  sw->add_option("--vary", vary, "key=v1,v2,...")->required();
  sw->add_option("--threads", threads)->check(CLI::PositiveNumber);

  auto *oc = app.add_subcommand("overlay-check", "validate an overlay dump");
  oc->add_option("dump", dump)->required()->check(CLI::ExistingFile);

  auto *re = app.add_subcommand("regret-eval", "recompute Nash regret from a policy history");
  re->add_option("history", history)->required()->check(CLI::ExistingFile);
  re->add_option("--model", model, "model.json; defaults to the history's directory");

  auto *rp = app.add_subcommand("replay", "re-run a manifest and compare file hashes");
  rp->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt)
    o.seed = std::to_string(seed);

  if (*run)
    return cmd_run(scenario, out, o);
  if (*sw)
    return cmd_sweep(scenario, vary, out, threads, o);
  if (*oc)
    return cmd_overlay_check(dump);
  if (*re)
    return cmd_regret_eval(history, model);
  return cmd_replay(manifest, out);
}
