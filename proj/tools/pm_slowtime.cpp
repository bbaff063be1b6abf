// pm-slowtime: batch front end for the slow-time Perona-Malik experiments.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pmslow/errors.hpp"
#include "pmslow/harness.hpp"

namespace {

unsigned threads_from_env() {
  const char* env = std::getenv("PMSLOW_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0') throw pmslow::ConfigError("PMSLOW_THREADS", "expected a nonnegative integer");
  return static_cast<unsigned>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rescaled semidiscrete Perona-Malik flow and its plateau limit"};
  app.set_version_flag("--version", std::string(pmslow::version()));

  std::string experiment;
  std::string config_file;
  std::string preset;
  std::string out_dir = "out";
  app.add_option("experiment", experiment,
                 "simulate-discrete | simulate-limit | converge | audits | gamma | slope | wellprep")
      ->required();
  auto* config_opt = app.add_option("--config", config_file, "JSON configuration file");
  auto* preset_opt = app.add_option("--preset", preset, "embedded configuration: sym2 | sym3 | stair3");
  config_opt->excludes(preset_opt);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pmslow::kExitConfigError;
  }
  if (config_opt->count() == 0 && preset_opt->count() == 0) {
    std::cerr << "error: one of --config or --preset is required\n";
    return pmslow::kExitConfigError;
  }

  const auto exp = pmslow::parse_experiment(experiment);
  if (!exp) {
    std::cerr << "error: unknown experiment '" << experiment << "'\n";
    return pmslow::kExitConfigError;
  }

  pmslow::RunConfig config;
  unsigned threads = 0;
  try {
    threads = threads_from_env();
    if (config_opt->count() > 0) {
      std::ifstream in(config_file, std::ios::binary);
      if (!in) throw pmslow::ConfigError("config", "cannot read " + config_file);
      std::ostringstream text;
      text << in.rdbuf();
      config = pmslow::RunConfig::from_json(text.str(), *exp);
    } else {
      config = pmslow::RunConfig::preset(preset, *exp);
    }
  } catch (const pmslow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return pmslow::kExitConfigError;
  }

  const pmslow::RunResult result = pmslow::run(config, out_dir, threads);
  switch (result.status) {
    case pmslow::kExitOk:
    case pmslow::kExitAuditFailed:
      std::cout << pmslow::experiment_name(*exp) << ' ' << config.name << ": "
                << (result.passed ? "passed" : "FAILED") << " (worst slack " << result.worst_slack << ")\n";
      for (const auto& f : result.files) std::cout << "  wrote " << f.string() << '\n';
      break;
    case pmslow::kExitConfigError:
      std::cerr << "config error: " << result.message << '\n';
      break;
    default:
      std::cerr << "numerical abort: " << result.message << '\n';
      break;
  }
  return result.status;
}
