// Command-line driver: one experiment per invocation.
//
//   difflab run <experiment> [--config FILE] [--seed U64] [--out DIR]
//               [--param key=value]... [--<key> value]... [--threads N]
//   difflab list
//
// Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage, 3 runtime.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "difflab/experiments.hpp"
#include "difflab/parallel.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdictFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw difflab::UsageError("expected key=value, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

/// Accepts `--key value` and `--key=value` for experiment parameters.
std::vector<std::pair<std::string, std::string>> parse_extras(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() < 3) {
      throw difflab::UsageError("unexpected argument '" + tok + "'");
    }
    const std::string body = tok.substr(2);
    if (body.find('=') != std::string::npos) {
      out.push_back(split_assignment(body));
    } else if (i + 1 < extras.size()) {
      out.emplace_back(body, extras[++i]);
    } else {
      throw difflab::UsageError("option '" + tok + "' needs a value");
    }
  }
  return out;
}

difflab::ordered_json read_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw difflab::UsageError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return difflab::ordered_json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw difflab::UsageError("config file " + path + ": " + e.what());
  }
}

void print_list() {
  for (const auto& e : difflab::experiments()) {
    std::cout << e.name << "\n  " << e.summary << '\n';
    for (const auto& p : e.params) {
      std::cout << "    --" << p.name;
      if (p.default_value.is_null()) {
        std::cout << " (required)";
      } else {
        std::cout << " [" << p.default_value.dump() << ']';
      }
      std::cout << "  " << p.help << '\n';
    }
  }
}

void print_summary(const difflab::Report& report, const std::filesystem::path& out) {
  for (const auto& v : report.verdicts) {
    std::cout << (v.pass() ? "PASS " : "FAIL ") << v.name << ": "
              << difflab::format_double(v.value) << ' ' << difflab::to_string(v.relation)
              << ' ' << difflab::format_double(v.threshold) << '\n';
  }
  std::cout << report.experiment << ": " << (report.pass() ? "pass" : "fail")
            << " (" << out.string() << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"difflab: diffusion experiments", "difflab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(difflab::kVersion));

  auto* list = app.add_subcommand("list", "List experiments and their parameters");

  auto* run = app.add_subcommand("run", "Run one experiment");
  std::string experiment;
  std::string config_path;
  std::string seed;
  std::string out_dir;
  std::vector<std::string> params;
  unsigned threads = 0;
  run->add_option("experiment", experiment, "Experiment name")->required();
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--seed", seed, "64-bit seed (DIFFUSION_SEED overrides)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--param", params, "Parameter override key=value")->allow_extra_args(false);
  run->add_option("--threads", threads, "Worker threads (0 = hardware)");
  run->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  if (list->parsed()) {
    print_list();
    return kExitPass;
  }

  difflab::ExperimentConfig config;
  try {
    difflab::ConfigSources sources;
    if (!config_path.empty()) sources.file = read_config(config_path);
    for (const auto& kv : parse_extras(run->remaining())) sources.overrides.push_back(kv);
    for (const auto& p : params) sources.overrides.push_back(split_assignment(p));
    if (run->count("--seed")) sources.seed_flag = seed;
    if (const char* env = std::getenv("DIFFUSION_SEED"); env && *env) sources.seed_env = env;
    if (run->count("--out")) sources.out_flag = out_dir;
    config = difflab::resolve_config(experiment, sources);
  } catch (const difflab::UsageError& e) {
    std::cerr << "difflab: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    difflab::set_thread_count(threads);
    auto output = difflab::run_experiment(config);
    difflab::emit(output.report, output.tables, config.out_dir);
    print_summary(output.report, config.out_dir);
    return output.report.pass() ? kExitPass : kExitVerdictFail;
  } catch (const difflab::UsageError& e) {
    std::cerr << "difflab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "difflab: " << e.what() << '\n';
    return kExitRuntime;
  }
}
