#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "suites.hpp"

using namespace ftct;
namespace fs = std::filesystem;

namespace {

KeyValueConfig parse(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in, "test.ini");
}

int config_error_line(const std::string& text) {
  try {
    cli::parse_config(parse(text));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "ftct_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& config_text, const fs::path& dir, const std::string& extra = "") {
  auto cfg = dir / "run.ini";
  std::ofstream(cfg) << config_text;
  std::string cmd = std::string("FTCT_LOG=quiet ") + FTCT_BINARY + " --config " + cfg.string() + " --out " +
                    (dir / "out").string() + " " + extra + " > " + (dir / "stdout.txt").string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kProfile = R"(# profile of the test surface
suite = profile
seed = 1

[model]
kind = closed_form
name = tanh_gauss
t_max = 3.0

[profile]
points = 101
expect_g0 = 8
)";

}  // namespace

TEST(Config, SectionsCommentsAndValues) {
  auto kv = parse("a = 1 # trailing\n[s]\nb = x y\nlist = 1, 2.5,3\n");
  EXPECT_EQ(kv.get_string("a", ""), "1");
  EXPECT_EQ(kv.get_string("s.b", ""), "x y");
  EXPECT_EQ(kv.get_list("s.list", {}), (std::vector<double>{1.0, 2.5, 3.0}));
  EXPECT_EQ(kv.line_of("s.b"), 3);
}

TEST(Config, MalformedInputReportsLine) {
  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("a = 1\nno equals sign\n"), 2);
  EXPECT_EQ(line_of("a = 1\n[open\n"), 2);
  EXPECT_EQ(line_of("a = 1\na = 2\n"), 2);
  EXPECT_EQ(line_of("\n\na =\n"), 3);
}

TEST(Config, SchemaValidation) {
  EXPECT_EQ(config_error_line("suite = profile\nbogus = 1\n"), 2);
  EXPECT_EQ(config_error_line("suite = profile\nsample_count = 0\n"), 2);
  EXPECT_EQ(config_error_line("suite = profile\n[tolerances]\nangle = -1\n"), 3);
  EXPECT_EQ(config_error_line("suite = nonsense\n"), 1);
  EXPECT_EQ(config_error_line("suite = tct\n[tct]\nmode = sideways\n"), 3);
  EXPECT_EQ(config_error_line("suite = profile\nseed = -4\n"), 2);
  auto c = cli::parse_config(parse("suite = tct\nseed = 18446744073709551615\n[tct]\nmode = weak\ndelta = 0.1\n"));
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.tct_mode, "weak");
  EXPECT_DOUBLE_EQ(c.tol("tct"), 1e-4);
}

TEST(Config, BuildersProduceRequestedGeometry) {
  auto c = cli::parse_config(parse("suite = curvature\n[manifold]\nfamily = randers\nb1 = 0.5\n"));
  auto S = cli::build_model(c);
  auto ch = cli::build_chart(c, S);
  EXPECT_DOUBLE_EQ(ch.F({0.0, 0.0}, {1.0, 0.0}), 1.5);
  auto r = cli::parse_config(parse("suite = tct\n[manifold]\nfamily = revolution\n"));
  auto M = cli::build_chart(r, cli::build_model(r));
  // radial curvature of the bumped surface exceeds the model's by 0.3 e^{-t}
  double K = flag_curvature(M, {1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0});
  EXPECT_NEAR(K - S.curvature(1.0), 0.3 * std::exp(-1.0), 1e-6);
}

TEST(Config, CurvatureTableModel) {
  auto dir = scratch("table");
  {
    std::ofstream t(dir / "g.csv");
    t << "# t, G\n";
    for (int i = 0; i <= 300; ++i) t << 0.01 * i << ", " << -1.0 << "\n";
  }
  auto c = cli::parse_config(
      parse("suite = profile\n[model]\nkind = curvature_table\ntable = " + (dir / "g.csv").string() + "\n"));
  c.model_t_max = 2.5;
  auto S = cli::build_model(c);
  EXPECT_NEAR(S.f(2.0), std::sinh(2.0), 1e-8);
}

TEST(Cli, ProfileSuiteSucceeds) {
  auto dir = scratch("profile");
  EXPECT_EQ(run_cli(kProfile, dir), 0);
  auto summary = slurp(dir / "out" / "summary.txt");
  EXPECT_NE(summary.find("G(0+) = 8"), std::string::npos);
  EXPECT_NE(summary.find("rho = 0.62469"), std::string::npos);
  auto csv = slurp(dir / "out" / "profile.csv");
  EXPECT_EQ(csv.substr(0, 6), "t,f,G\n");
  EXPECT_TRUE(fs::exists(dir / "out" / "profile.dat"));
}

TEST(Cli, FailedCheckExitsOne) {
  std::string text = kProfile;
  text.replace(text.find("expect_g0 = 8"), 13, "expect_g0 = 7");
  EXPECT_EQ(run_cli(text, scratch("fail")), 1);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli("suite = profile\nsample_count = 0\n", scratch("zero")), 2);
  EXPECT_EQ(run_cli("suite = profile\nthis is not a pair\n", scratch("malformed")), 2);
  auto dir = scratch("diag");
  run_cli("suite = profile\n\nunknown_key = 3\n", dir);
  EXPECT_NE(slurp(dir / "stdout.txt").find(":3"), std::string::npos);
  auto dir2 = scratch("missing");
  int rc = std::system((std::string(FTCT_BINARY) + " --config " + (dir2 / "nope.ini").string() + " > /dev/null 2>&1")
                           .c_str());
  EXPECT_EQ(WEXITSTATUS(rc), 2);
}

TEST(Cli, UnwritableOutputExitsTwo) {
  auto dir = scratch("unwritable");
  std::ofstream(dir / "blocker") << "x";
  auto cfg = dir / "run.ini";
  std::ofstream(cfg) << kProfile;
  std::string cmd = std::string("FTCT_LOG=quiet ") + FTCT_BINARY + " --config " + cfg.string() + " --out " +
                    (dir / "blocker" / "sub").string() + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(rc), 2);
}

TEST(Cli, OutputIndependentOfJobsAndRepeatable) {
  const std::string text =
      "suite = angles\nseed = 5\nsample_count = 6\n[manifold]\nfamily = randers\nb1 = 0.4\nb2 = 0.1\n";
  auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  ASSERT_EQ(run_cli(text, a), 0);
  ASSERT_EQ(run_cli(text, b), 0);
  ASSERT_EQ(run_cli(text, c, "--jobs 3"), 0);
  auto ca = slurp(a / "out" / "angles.csv");
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, slurp(b / "out" / "angles.csv"));
  EXPECT_EQ(ca, slurp(c / "out" / "angles.csv"));
  auto d = scratch("det_d");
  ASSERT_EQ(run_cli(text, d, "--seed 6"), 0);
  EXPECT_NE(ca, slurp(d / "out" / "angles.csv"));
}

TEST(Cli, EqualityTriangleSuite) {
  const std::string text =
      "suite = tct\nseed = 2\nsample_count = 3\n[manifold]\nfamily = model\nradius = 2.0\n"
      "[tct]\nrequire_comparison = true\n";
  auto dir = scratch("tct");
  EXPECT_EQ(run_cli(text, dir, "--jobs 2"), 0);
  auto csv = slurp(dir / "out" / "tct.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "seed,d_px,d_py,d_xy,L_m,angle_x,model_angle_x,angle_y,model_angle_y,min_margin,status");
  std::size_t rows = 0, pos = 0;
  while ((pos = csv.find(",PASS\n", pos)) != std::string::npos) ++rows, ++pos;
  EXPECT_EQ(rows, 3u);
}
