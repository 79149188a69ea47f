#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "suites.hpp"

namespace {

void configure_logging() {
  const char* env = std::getenv("FTCT_LOG");
  std::string level = env ? env : "info";
  if (level == "quiet")
    spdlog::set_level(spdlog::level::off);
  else if (level == "debug")
    spdlog::set_level(spdlog::level::debug);
  else
    spdlog::set_level(spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch verification suites for Finsler triangle comparison"};
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--config", config_path, "Experiment config file")->required();
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides output_path)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed (overrides the config)");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  configure_logging();
  try {
    auto cfg = ftct::cli::parse_config(ftct::KeyValueConfig::load(config_path));
    if (*seed_opt) cfg.seed = seed;
    std::string dir = *out_opt ? out_dir : cfg.output_path;
    auto outcome = ftct::cli::run_suite(cfg, dir, jobs);
    for (const auto& line : outcome.summary) std::cout << line << '\n';
    std::cout << "PASS " << outcome.pass << ", FAIL " << outcome.fail << ", NOT_APPLICABLE "
              << outcome.not_applicable << ", INCONCLUSIVE " << outcome.inconclusive << '\n';
    return outcome.exit_code();
  } catch (const ftct::Error& e) {
    bool config_error = e.kind() == ftct::ErrorKind::ConfigError || e.kind() == ftct::ErrorKind::IoError;
    std::cerr << "error: " << e.what() << '\n';
    return config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
