// Copyright 2026 The impactlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Talks to the library only through its C API.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "impactlab/impactlab.h"

namespace {

struct ConfigHandle {
  il_config* p = nullptr;
  ~ConfigHandle() { il_config_free(p); }
};

// Prints the error and returns the process exit code.
int report(il_status st, const char* what) {
  std::fprintf(stderr, "impactlab: %s failed (%s): %s\n", what, il_status_name(st), il_last_error());
  return il_exit_code(st);
}

int emit(il_status st, char* summary, const char* what) {
  if (summary) {
    std::printf("%s\n", summary);
    il_free_string(summary);
  }
  return st == IL_OK ? 0 : report(st, what);
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"impactlab: learned-collision hybrid simulation experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, shape;
  std::optional<unsigned long long> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> sets;
  app.add_option("-c,--config", config_path, "Run configuration JSON");
  app.add_option("-o,--out", out_dir, "Output directory (overrides out_dir)");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--threads", threads, "Thread cap (0 = machine parallelism)");
  app.add_option("--shape", shape, "semidisc, square or triangle");
  app.add_option("--set", sets, "Override a config field, key=json")->take_all();

  auto* gen = app.add_subcommand("gen-data", "Generate a simulated or proxy-real dataset");
  bool sim = false, real = false;
  std::optional<long> n;
  gen->add_flag("--sim", sim, "Simulated collisions (default)");
  gen->add_flag("--real", real, "Real-world proxy collisions with slide traces");
  gen->add_option("--n", n, "Number of samples");

  auto* train = app.add_subcommand("train", "Pretrain, identify and fine-tune");
  bool skip_finetune = false;
  train->add_flag("--skip-finetune", skip_finetune, "Stop after identification");

  auto* eval = app.add_subcommand("eval", "Accuracy table on the held-out proxy data");
  std::vector<double> alphas;
  eval->add_option("--alpha", alphas, "Accuracy thresholds");

  app.add_subcommand("plan", "Planning error, hybrid vs full solver, executed on the proxy");
  app.add_subcommand("bench", "Single-threaded search-time benchmark");
  auto* route = app.add_subcommand("route", "Route success rates per policy engine");
  std::optional<int> trials;
  route->add_option("--trials", trials, "Trials per route");

  auto* verify = app.add_subcommand("verify", "Check report hashes and compare two runs");
  std::string dir_a, dir_b;
  verify->add_option("--dir", dir_a, "Run directory to check (default: out_dir)");
  verify->add_option("--against", dir_b, "Second run directory to compare byte-wise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  if (sim && real) {
    std::fprintf(stderr, "impactlab: --sim and --real are exclusive\n");
    return 1;
  }

  ConfigHandle cfg;
  il_status st = config_path.empty() ? il_config_default(&cfg.p)
                                     : il_config_load(config_path.c_str(), &cfg.p);
  if (st != IL_OK) return report(st, "loading config");

  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "impactlab: --set expects key=value, got '%s'\n", kv.c_str());
      return 1;
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!shape.empty()) overrides.emplace_back("shape.kind", json_string(shape));
  if (!out_dir.empty()) overrides.emplace_back("out_dir", json_string(out_dir));
  if (seed) overrides.emplace_back("seed", std::to_string(*seed));
  if (threads) overrides.emplace_back("threads", std::to_string(*threads));
  if (n) overrides.emplace_back(real ? "data.n_real" : "data.n_sim", std::to_string(*n));
  if (trials) overrides.emplace_back("routes.trials", std::to_string(*trials));
  if (!alphas.empty()) {
    std::string arr = "[";
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", alphas[i]);
      arr += (i ? "," : "") + std::string(buf);
    }
    overrides.emplace_back("alphas", arr + "]");
  }
  for (const auto& [k, v] : overrides) {
    st = il_config_set(cfg.p, k.c_str(), v.c_str());
    if (st != IL_OK) return report(st, ("setting " + k).c_str());
  }
  if (threads) il_set_threads(*threads);

  char* summary = nullptr;
  const char* what = nullptr;
  if (*gen) {
    what = "gen-data";
    st = il_gen_data(cfg.p, real ? 1 : 0, &summary);
  } else if (*train) {
    what = "train";
    st = il_train(cfg.p, skip_finetune ? 1 : 0, &summary);
  } else if (*eval) {
    what = "eval";
    st = il_eval(cfg.p, &summary);
  } else if (app.got_subcommand("plan")) {
    what = "plan";
    st = il_plan(cfg.p, &summary);
  } else if (app.got_subcommand("bench")) {
    what = "bench";
    st = il_bench(cfg.p, &summary);
  } else if (*route) {
    what = "route";
    st = il_route(cfg.p, &summary);
  }
  if (what) return emit(st, summary, what);
  if (*verify) {
    if (dir_a.empty()) {
      char* text = nullptr;
      st = il_config_get(cfg.p, "out_dir", &text);
      if (st != IL_OK) return report(st, "verify");
      const std::string quoted = text;
      il_free_string(text);
      dir_a = quoted.substr(1, quoted.size() - 2);
    }
    st = il_verify(cfg.p, dir_a.c_str(), dir_b.empty() ? nullptr : dir_b.c_str(), &summary);
    return emit(st, summary, "verify");
  }
  return 1;
}
