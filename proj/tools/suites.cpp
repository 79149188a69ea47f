#include "suites.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace ftct::cli {

namespace {

namespace fs = std::filesystem;

const std::map<std::string, double> kDefaultTolerances{
    {"profile", 1e-4},  {"curvature", 1e-4},       {"angle", 5e-4},
    {"supplement", 1e-5}, {"key_lemma", 1e-7},     {"lemma", 1e-6},
    {"double_triangle", 1e-6}, {"double_triangle_equality", 1e-6}, {"tct", 1e-4}};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t row_seed(std::uint64_t seed, int index) { return splitmix64(seed ^ splitmix64(index + 1)); }

template <class F>
void parallel_for(int n, int jobs, F&& body) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, n); ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path), out_(path) {
    if (!out_) fail(ErrorKind::IoError, "cannot write " + path);
    out_.precision(17);
  }
  template <class... Ts>
  void row(const Ts&... xs) {
    bool first = true;
    ((out_ << (first ? "" : ",") << xs, first = false), ...);
    out_ << '\n';
  }
  std::ostream& stream() { return out_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

std::string status_name(TctStatus s) { return to_string(s); }

void tally(SuiteOutcome& o, TctStatus s) {
  switch (s) {
    case TctStatus::Pass: ++o.pass; break;
    case TctStatus::Fail: ++o.fail; break;
    case TctStatus::NotApplicable: ++o.not_applicable; break;
    case TctStatus::Inconclusive: ++o.inconclusive; break;
  }
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

// ---- model builders ---------------------------------------------------------

ProfileSpec table_curvature(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot read curvature table " + path);
  std::vector<double> ts, gs;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ss(line);
    double t, g;
    if (!(ss >> t)) continue;
    if (!(ss >> g)) throw ConfigError(path, ln, "expected two columns t G");
    ts.push_back(t);
    gs.push_back(g);
  }
  if (ts.size() < 4) fail(ErrorKind::ConfigError, "curvature table needs at least 4 rows");
  if (ts.front() != 0.0) fail(ErrorKind::ConfigError, "curvature table must start at t = 0");
  double h = ts[1] - ts[0];
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (std::abs(ts[i] - ts[i - 1] - h) > 1e-9 * std::max(1.0, h))
      throw ConfigError(path, static_cast<int>(i + 1), "curvature table must be uniformly spaced");
  auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(gs.begin(), gs.end(),
                                                                                             0.0, h);
  double t_end = ts.back();
  auto fn = [spline, t_end](const auto& t) {
    using T = std::decay_t<decltype(t)>;
    double t0 = std::clamp(value_of(t), 0.0, t_end);
    T d = t - t0;
    return T((*spline)(t0)) + d * (spline->prime(t0) + d * (0.5 * spline->double_prime(t0)));
  };
  return ProfileSpec::curvature(fn, "table");
}

}  // namespace

double ExperimentConfig::tol(const std::string& key) const {
  auto it = tolerances.find(key);
  return it != tolerances.end() ? it->second : kDefaultTolerances.at(key);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"suite",
                               "seed",
                               "sample_count",
                               "output_path",
                               "model.kind",
                               "model.name",
                               "model.table",
                               "model.t_max",
                               "model.k",
                               "model.bump",
                               "manifold.family",
                               "manifold.radius",
                               "manifold.t_max",
                               "manifold.bump",
                               "manifold.a11",
                               "manifold.a12",
                               "manifold.a22",
                               "manifold.k",
                               "manifold.b1",
                               "manifold.b2",
                               "manifold.db11",
                               "manifold.db12",
                               "manifold.db21",
                               "manifold.db22",
                               "profile.points",
                               "profile.expect_g0",
                               "angles.h0",
                               "angles.length",
                               "angles.r_min",
                               "angles.r_max",
                               "key_lemma.deltas",
                               "key_lemma.omegas_deg",
                               "key_lemma.l",
                               "key_lemma.eps",
                               "key_lemma.grid",
                               "key_lemma.theta_floor_deg",
                               "double_triangle.r_min",
                               "double_triangle.r_max",
                               "tct.mode",
                               "tct.delta",
                               "tct.neighborhood_radius",
                               "tct.base_points",
                               "tct.directions",
                               "tct.r_max",
                               "tct.require_comparison"};
    for (const auto& [name, v] : kDefaultTolerances) k.push_back("tolerances." + name);
    return k;
  }();
  return keys;
}

ExperimentConfig parse_config(const KeyValueConfig& kv) {
  const auto& keys = config_keys();
  kv.require_known(std::set<std::string>(keys.begin(), keys.end()));
  ExperimentConfig c;
  c.suite = kv.require_string("suite");
  static const std::set<std::string> suites{"profile", "curvature", "angles", "key_lemma", "double_triangle", "tct"};
  if (!suites.count(c.suite)) kv.reject("suite", "unknown suite '" + c.suite + "'");
  c.seed = kv.get_u64("seed", c.seed);
  auto n = kv.get_int("sample_count", c.sample_count);
  if (n < 1) kv.reject("sample_count", "sample_count must be >= 1");
  c.sample_count = static_cast<int>(n);
  c.output_path = kv.get_string("output_path", c.output_path);

  c.model_kind = kv.get_string("model.kind", c.model_kind);
  c.model_name = kv.get_string("model.name", c.model_name);
  c.model_table = kv.get_string("model.table", c.model_table);
  c.model_t_max = kv.get_double("model.t_max", c.model_t_max);
  c.model_k = kv.get_double("model.k", c.model_k);
  c.model_bump = kv.get_double("model.bump", c.model_bump);
  static const std::set<std::string> kinds{"closed_form", "curvature", "curvature_table"};
  if (!kinds.count(c.model_kind)) kv.reject("model.kind", "unknown model kind '" + c.model_kind + "'");
  if (c.model_kind == "closed_form" && c.model_name != "tanh_gauss" && c.model_name != "plane" &&
      c.model_name != "hyperbolic")
    kv.reject("model.name", "unknown closed-form profile '" + c.model_name + "'");
  if (c.model_kind == "curvature" && c.model_name != "tanh_gauss" && c.model_name != "constant")
    kv.reject("model.name", "unknown curvature profile '" + c.model_name + "'");
  if (c.model_kind == "curvature_table" && c.model_table.empty())
    kv.reject("model.kind", "curvature_table needs model.table");
  if (!(c.model_t_max > 0.0)) kv.reject("model.t_max", "model.t_max must be positive");

  c.manifold_family = kv.get_string("manifold.family", c.manifold_family);
  static const std::set<std::string> fams{"model", "revolution", "euclidean", "riemannian", "randers",
                                          "randers_linear"};
  if (!fams.count(c.manifold_family)) kv.reject("manifold.family", "unknown family '" + c.manifold_family + "'");
  c.manifold_radius = kv.get_double("manifold.radius", c.manifold_radius);
  c.manifold_t_max = kv.get_double("manifold.t_max", c.manifold_t_max);
  c.manifold_bump = kv.get_double("manifold.bump", c.manifold_bump);
  c.manifold_A = {{{kv.get_double("manifold.a11", 1.0), kv.get_double("manifold.a12", 0.0)},
                   {kv.get_double("manifold.a12", 0.0), kv.get_double("manifold.a22", 1.0)}}};
  c.manifold_k = kv.get_double("manifold.k", c.manifold_k);
  c.manifold_b = {kv.get_double("manifold.b1", 0.0), kv.get_double("manifold.b2", 0.0)};
  c.manifold_B = {{{kv.get_double("manifold.db11", 0.0), kv.get_double("manifold.db12", 0.0)},
                   {kv.get_double("manifold.db21", 0.0), kv.get_double("manifold.db22", 0.0)}}};

  for (const auto& [name, v] : kDefaultTolerances) {
    std::string key = "tolerances." + name;
    if (!kv.has(key)) continue;
    double t = kv.get_double(key, v);
    if (!(t > 0.0)) kv.reject(key, "tolerances must be positive");
    c.tolerances[name] = t;
  }

  c.profile_points = static_cast<int>(kv.get_int("profile.points", c.profile_points));
  if (c.profile_points < 2) kv.reject("profile.points", "profile.points must be >= 2");
  if (kv.has("profile.expect_g0")) c.profile_expect_g0 = kv.get_double("profile.expect_g0", 0.0);
  c.angles_h0 = kv.get_double("angles.h0", c.angles_h0);
  c.angles_length = kv.get_double("angles.length", c.angles_length);
  c.angles_r_min = kv.get_double("angles.r_min", c.angles_r_min);
  c.angles_r_max = kv.get_double("angles.r_max", c.angles_r_max);
  if (!(c.angles_h0 > 0.0)) kv.reject("angles.h0", "angles.h0 must be positive");
  c.key_lemma_deltas = kv.get_list("key_lemma.deltas", c.key_lemma_deltas);
  c.key_lemma_omegas_deg = kv.get_list("key_lemma.omegas_deg", c.key_lemma_omegas_deg);
  for (double d : c.key_lemma_deltas)
    if (!(d > 0.0)) kv.reject("key_lemma.deltas", "deltas must be positive");
  c.key_lemma_l = kv.get_double("key_lemma.l", c.key_lemma_l);
  c.key_lemma_eps = kv.get_double("key_lemma.eps", c.key_lemma_eps);
  c.key_lemma_grid = static_cast<int>(kv.get_int("key_lemma.grid", c.key_lemma_grid));
  if (kv.has("key_lemma.theta_floor_deg"))
    c.key_lemma_theta_floor_deg = kv.get_double("key_lemma.theta_floor_deg", 0.0);
  c.double_r_min = kv.get_double("double_triangle.r_min", c.double_r_min);
  c.double_r_max = kv.get_double("double_triangle.r_max", c.double_r_max);
  c.tct_mode = kv.get_string("tct.mode", c.tct_mode);
  if (c.tct_mode != "exact" && c.tct_mode != "weak") kv.reject("tct.mode", "tct.mode must be exact or weak");
  c.tct_delta = kv.get_double("tct.delta", c.tct_delta);
  c.tct_neighborhood_radius = kv.get_double("tct.neighborhood_radius", c.tct_neighborhood_radius);
  c.tct_base_points = static_cast<int>(kv.get_int("tct.base_points", c.tct_base_points));
  c.tct_directions = static_cast<int>(kv.get_int("tct.directions", c.tct_directions));
  c.tct_r_max = kv.get_double("tct.r_max", c.tct_r_max);
  c.tct_require_comparison = kv.get_bool("tct.require_comparison", c.tct_require_comparison);
  return c;
}

ModelSurface build_model(const ExperimentConfig& c) {
  if (c.model_kind == "closed_form") {
    if (c.model_name == "tanh_gauss") return build_profile(tanh_gauss_spec(), c.model_t_max);
    if (c.model_name == "plane") return build_profile(plane_spec(), c.model_t_max);
    return build_profile(hyperbolic_spec(), c.model_t_max);
  }
  if (c.model_kind == "curvature") {
    if (c.model_name == "tanh_gauss")
      return build_profile(ProfileSpec::curvature(TanhGaussCurvature{c.model_bump}, "tanh_gauss_curvature"),
                           c.model_t_max);
    return build_profile(constant_curvature_spec(c.model_k), c.model_t_max);
  }
  return build_profile(table_curvature(c.model_table), c.model_t_max);
}

FinslerChart build_chart(const ExperimentConfig& c, const ModelSurface& model) {
  const std::string& f = c.manifold_family;
  if (f == "model") {
    double R = c.manifold_radius > 0.0 ? c.manifold_radius : model.t_max() * 2.0 / 3.0;
    return normal_chart(model, R);
  }
  if (f == "revolution") {
    ProfileSpec spec;
    if (c.model_name == "tanh_gauss" && c.model_kind != "curvature_table") {
      spec = ProfileSpec::curvature(TanhGaussCurvature{c.model_bump + c.manifold_bump}, "revolution");
    } else {
      double bump = c.manifold_bump;
      spec = ProfileSpec::curvature(
          [model, bump](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            using std::exp;
            double t0 = value_of(t);
            Jet2 j = model.curvature_jet(t0);
            T d = t - t0;
            return T(j[0]) + d * (j[1] + d * (0.5 * j[2])) + bump * exp(-t);
          },
          "revolution");
    }
    ModelSurface M = build_profile(spec, c.manifold_t_max);
    double R = c.manifold_radius > 0.0 ? c.manifold_radius : M.t_max() - 0.05;
    return normal_chart(M, R);
  }
  double R = c.manifold_radius > 0.0 ? c.manifold_radius : 3.0;
  DiskDomain dom{{0.0, 0.0}, R};
  if (f == "euclidean") return euclidean_chart(dom);
  if (f == "riemannian") return riemannian_chart(c.manifold_A, c.manifold_k, dom);
  if (f == "randers") return constant_randers_chart(c.manifold_A, c.manifold_b, dom);
  return linear_randers_chart(c.manifold_A, c.manifold_b, c.manifold_B, dom);
}

namespace {

double chart_radius(const FinslerChart& ch) {
  if (auto* d = std::get_if<DiskDomain>(&ch.domain())) return d->radius;
  return 1.0;
}

// ---- suites ------------------------------------------------------------------

void suite_profile(const ExperimentConfig& c, const std::string& dir, SuiteOutcome& o) {
  auto S = build_model(c);
  CsvWriter csv(dir + "/profile.csv");
  std::ofstream dat(dir + "/profile.dat");
  if (!dat) fail(ErrorKind::IoError, "cannot write " + dir + "/profile.dat");
  dat.precision(17);
  csv.row("t", "f", "G");
  std::vector<std::array<double, 3>> rows;
  for (int i = 0; i < c.profile_points; ++i) {
    double t = S.t_max() * i / (c.profile_points - 1);
    double G = i == 0 ? S.curvature_at_pole() : S.curvature(t);
    rows.push_back({t, S.f(t), G});
    csv.row(t, S.f(t), G);
  }
  dat << "# t f\n";
  for (const auto& r : rows) dat << r[0] << ' ' << r[1] << '\n';
  dat << "\n\n# t G\n";
  for (const auto& r : rows) dat << r[0] << ' ' << r[2] << '\n';
  o.files = {csv.path(), dir + "/profile.dat"};

  o.summary.push_back("model: " + S.name() + ", t_max = " + num(S.t_max()));
  o.summary.push_back("G(0+) = " + num(S.curvature_at_pole()));
  o.summary.push_back(S.rho() ? "rho = " + num(*S.rho()) : std::string("rho: none"));
  o.summary.push_back(std::string("von Mangoldt: ") + (S.von_mangoldt() ? "yes" : "no"));
  auto check = [&](bool ok, const std::string& what) {
    ok ? ++o.pass : ++o.fail;
    o.summary.push_back((ok ? "PASS " : "FAIL ") + what);
  };
  check(std::isfinite(S.curvature_at_pole()), "G(0+) is finite");
  bool positive = true;
  for (const auto& r : rows) positive = positive && (r[0] == 0.0 || r[1] > 0.0);
  check(positive, "f > 0 on (0, t_max]");
  if (c.profile_expect_g0)
    check(std::abs(S.curvature_at_pole() - *c.profile_expect_g0) <= c.tol("profile"),
          "G(0+) within " + num(c.tol("profile")) + " of " + num(*c.profile_expect_g0));
}

void suite_curvature(const ExperimentConfig& c, const std::string& dir, int jobs, SuiteOutcome& o) {
  auto S = build_model(c);
  auto chart = build_chart(c, S);
  const double R = chart_radius(chart);
  const bool equality = c.manifold_family == "model";
  struct Row {
    Vec2 x{};
    double t = 0, K = 0, G = 0, margin = 0;
    TctStatus status = TctStatus::Inconclusive;
  };
  std::vector<Row> rows(c.sample_count);
  parallel_for(c.sample_count, jobs, [&](int i) {
    std::mt19937_64 rng(row_seed(c.seed, i));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double r = R * (0.05 + 0.9 * U(rng)), a = 2.0 * M_PI * U(rng);
    Row& row = rows[i];
    row.x = chart.base_point() + r * unit_vector(a);
    try {
      auto mg = minimal_geodesics(chart, chart.base_point(), row.x, {}, false);
      row.t = mg.distance;
      if (row.t > S.t_max()) {
        row.status = TctStatus::NotApplicable;
        return;
      }
      Vec2 v = mg.shots.front().end_velocity;
      row.K = flag_curvature(chart, row.x, v, {-v[1], v[0]});
      row.G = S.curvature(row.t);
      row.margin = row.K - row.G;
      bool ok = equality ? std::abs(row.margin) <= c.tol("curvature") : row.margin >= -c.tol("curvature");
      row.status = ok ? TctStatus::Pass : TctStatus::Fail;
    } catch (const Error& e) {
      spdlog::debug("curvature sample {}: {}", i, e.what());
    }
  });
  CsvWriter csv(dir + "/curvature.csv");
  csv.row("index", "x0", "x1", "t", "K", "G", "margin", "status");
  std::ofstream dat(dir + "/curvature.dat");
  dat.precision(17);
  dat << "# t K\n";
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.sample_count; ++i) {
    const auto& r = rows[i];
    csv.row(i, r.x[0], r.x[1], r.t, r.K, r.G, r.margin, status_name(r.status));
    if (r.status == TctStatus::Pass || r.status == TctStatus::Fail) {
      dat << r.t << ' ' << r.K << '\n';
      worst = std::min(worst, equality ? -std::abs(r.margin) : r.margin);
    }
    tally(o, r.status);
  }
  o.files = {csv.path(), dir + "/curvature.dat"};
  o.summary.push_back(std::string(equality ? "check |K - G| <= " : "check K - G >= -") + num(c.tol("curvature")));
  o.summary.push_back("worst margin = " + num(worst));
}

void suite_angles(const ExperimentConfig& c, const std::string& dir, int jobs, SuiteOutcome& o) {
  auto S = build_model(c);
  auto chart = build_chart(c, S);
  struct Row {
    Vec2 x{};
    double dir = 0, lambda = 1, dq = 0, fv = 0, diff = 0;
    std::size_t branches = 0;
    TctStatus status = TctStatus::Inconclusive;
  };
  std::vector<std::array<Row, 2>> rows(c.sample_count);
  parallel_for(c.sample_count, jobs, [&](int i) {
    std::mt19937_64 rng(row_seed(c.seed, i));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double r = c.angles_r_min + (c.angles_r_max - c.angles_r_min) * U(rng);
    double a = 2.0 * M_PI * U(rng), psi = 2.0 * M_PI * U(rng);
    Vec2 z = chart.base_point() + r * unit_vector(a);
    try {
      auto cpath = geodesic_ivp(chart, z, unit_vector(psi), c.angles_length);
      QuotientOptions qo;
      qo.h0 = c.angles_h0;
      for (int side = 0; side < 2; ++side) {
        Row& row = rows[i][side];
        double s = side == 0 ? 0.0 : cpath.t_end();
        AngleSide sd = side == 0 ? AngleSide::Forward : AngleSide::Backward;
        row.x = cpath.position(s);
        row.dir = polar_angle(cpath.velocity(s));
        try {
          auto fv = angle_first_variation(chart, row.x, cpath.velocity(s), radial_direction_set(chart, row.x));
          auto dq = angle_difference_quotient(chart, cpath, s, sd, qo);
          row.lambda = fv.lambda;
          row.branches = fv.branches;
          row.fv = side == 0 ? fv.forward_angle : fv.backward_angle;
          row.dq = side == 0 ? dq.forward_angle : dq.backward_angle;
          row.diff = std::abs(row.dq - row.fv);
          bool ok = row.diff <= c.tol("angle");
          if (fv.branches == 1)
            ok = ok && std::abs(fv.forward_angle + fv.backward_angle - M_PI) <= c.tol("supplement");
          else
            ok = ok && fv.forward_angle + fv.backward_angle <= M_PI + c.tol("supplement");
          row.status = ok ? TctStatus::Pass : TctStatus::Fail;
        } catch (const Error& e) {
          spdlog::debug("angle sample {} side {}: {}", i, side, e.what());
        }
      }
    } catch (const Error& e) {
      spdlog::debug("angle sample {}: {}", i, e.what());
    }
  });
  CsvWriter csv(dir + "/angles.csv");
  csv.row("index", "x0", "x1", "direction", "side", "lambda", "branches", "difference_quotient", "first_variation",
          "difference", "status");
  double worst = 0.0;
  for (int i = 0; i < c.sample_count; ++i) {
    for (int side = 0; side < 2; ++side) {
      const auto& r = rows[i][side];
      csv.row(i, r.x[0], r.x[1], r.dir, side == 0 ? "forward" : "backward", r.lambda, r.branches, r.dq, r.fv, r.diff,
              status_name(r.status));
      tally(o, r.status);
      if (r.status != TctStatus::Inconclusive) worst = std::max(worst, r.diff);
    }
  }
  o.files = {csv.path()};
  o.summary.push_back("chart: " + chart.name());
  o.summary.push_back("max |difference quotient - first variation| = " + num(worst));
}

void suite_key_lemma(const ExperimentConfig& c, const std::string& dir, int jobs, SuiteOutcome& o) {
  auto S = build_model(c);
  auto chart = build_chart(c, S);
  struct Combo {
    double delta, omega;
    std::optional<VariationReport> report;
    std::string error;
  };
  std::vector<Combo> combos;
  for (double d : c.key_lemma_deltas)
    for (double w : c.key_lemma_omegas_deg) combos.push_back({d, w * M_PI / 180.0, std::nullopt, ""});
  const Vec2 p = chart.base_point();
  const Vec2 x = p + c.key_lemma_l * Vec2{1.0, 0.0};
  parallel_for(static_cast<int>(combos.size()), jobs, [&](int k) {
    auto& cb = combos[k];
    try {
      auto mg = minimal_geodesics(chart, p, x, {}, false);
      KeyLemmaConfig kc;
      kc.x = x;
      kc.eps = c.key_lemma_eps;
      kc.grid = c.key_lemma_grid;
      kc.L_slack = c.tol("key_lemma");
      kc.lemma_slack = c.tol("lemma");
      kc.c_dir = direction_at_angle(chart, x, mg.shots.front().end_velocity, cb.omega);
      double floor = c.key_lemma_theta_floor_deg ? *c.key_lemma_theta_floor_deg * M_PI / 180.0
                                                 : std::min({cb.omega, M_PI - cb.omega, M_PI / 2}) - 1e-9;
      cb.report = key_lemma_check(chart, S, cb.delta, kc, floor);
    } catch (const Error& e) {
      cb.error = e.what();
    }
  });
  CsvWriter sum(dir + "/key_lemma_summary.csv");
  sum.row("index", "delta", "omega", "lambda", "l", "C1", "C2", "C3", "eps_prime", "I", "model_I", "index_gap_margin",
          "min_L_margin", "status");
  o.files.push_back(sum.path());
  for (std::size_t k = 0; k < combos.size(); ++k) {
    const auto& cb = combos[k];
    if (!cb.report) {
      sum.row(k, cb.delta, cb.omega, "nan", "nan", "nan", "nan", "nan", "nan", "nan", "nan", "nan", "nan", "FAIL");
      ++o.fail;
      o.summary.push_back("combo " + std::to_string(k) + ": " + cb.error);
      continue;
    }
    const auto& r = *cb.report;
    std::string st = r.pass ? "PASS" : "FAIL";
    r.pass ? ++o.pass : ++o.fail;
    sum.row(k, cb.delta, cb.omega, r.lambda, r.l, r.C1, r.C2_est, r.C3_est, r.eps_prime, r.I_value, r.model_I_value,
            r.index_gap_margin, r.min_L_margin, st);
    std::string base = dir + "/key_lemma_" + std::to_string(k);
    write_csv(r, base + ".csv");
    std::ofstream dat(base + ".dat");
    dat.precision(17);
    dat << "# s L\n";
    for (const auto& [s, L] : r.L_table) dat << s << ' ' << L << '\n';
    dat << "\n\n# s Ltilde\n";
    for (const auto& [s, L] : r.Ltilde_table) dat << s << ' ' << L << '\n';
    o.files.push_back(base + ".csv");
    o.files.push_back(base + ".dat");
  }
  o.summary.push_back("combinations: " + std::to_string(combos.size()));
}

void suite_double_triangle(const ExperimentConfig& c, const std::string& dir, int jobs, SuiteOutcome& o) {
  auto S = build_model(c);
  const int n = c.sample_count + 1;  // last row: straight configuration
  struct Row {
    std::optional<DoubleTriangleReport> report;
    DoubleTriangleSample sample{};
    TctStatus status = TctStatus::NotApplicable;
  };
  std::vector<Row> rows(n);
  DoubleTriangleSamplerOptions so;
  so.r_min = c.double_r_min;
  so.r_max = c.double_r_max;
  parallel_for(n, jobs, [&](int i) {
    Row& row = rows[i];
    try {
      if (i < c.sample_count) {
        auto s = sample_double_triangle(S, c.seed, static_cast<std::uint64_t>(i), so);
        if (!s) return;
        row.sample = *s;
        row.report = double_triangle_check(S, s->pxy, s->pyz, c.tol("double_triangle"));
        row.status = row.report->pass ? TctStatus::Pass : TctStatus::Fail;
      } else {
        double tx = 0.5 * (so.r_min + so.r_max);
        row.sample = straight_double_triangle(S, tx, 1.2 * tx, 1.5, 0.4);
        row.report = double_triangle_check(S, row.sample.pxy, row.sample.pyz, c.tol("double_triangle"));
        double tol = c.tol("double_triangle_equality");
        bool eq = std::abs(row.report->margin_x) <= tol && std::abs(row.report->margin_z) <= tol;
        row.status = eq ? TctStatus::Pass : TctStatus::Fail;
      }
    } catch (const Error& e) {
      spdlog::debug("double triangle {}: {}", i, e.what());
      row.status = TctStatus::Inconclusive;
    }
  });
  CsvWriter csv(dir + "/double_triangle.csv");
  csv.row("index", "kind", "side_px", "side_py", "side_pz", "side_xy", "side_yz", "angle_sum_y", "margin_x",
          "margin_z", "theta_z", "status");
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const auto& r = rows[i];
    const char* kind = i < c.sample_count ? "random" : "straight";
    if (r.report) {
      const auto& q = *r.report;
      csv.row(i, kind, r.sample.pxy.side_px, r.sample.pxy.side_py, r.sample.pyz.side_py, r.sample.pxy.side_xy,
              r.sample.pyz.side_xy, q.angle_sum_y, q.margin_x, q.margin_z, q.theta_z, status_name(r.status));
      if (i < c.sample_count) worst = std::min({worst, q.margin_x, q.margin_z});
    } else {
      csv.row(i, kind, "nan", "nan", "nan", "nan", "nan", "nan", "nan", "nan", "nan", status_name(r.status));
    }
    tally(o, r.status);
  }
  o.files = {csv.path()};
  o.summary.push_back("worst random margin = " + num(worst));
  if (rows.back().report)
    o.summary.push_back("straight configuration margins = " + num(rows.back().report->margin_x) + ", " +
                        num(rows.back().report->margin_z));
}

void suite_tct(const ExperimentConfig& c, const std::string& dir, int jobs, SuiteOutcome& o) {
  auto S = build_model(c);
  auto chart = build_chart(c, S);
  TriangleSamplerOptions so;
  so.r_max = c.tct_r_max;
  so.require_comparison = c.tct_require_comparison;
  so.hypotheses.neighborhood_radius = c.tct_neighborhood_radius;
  so.hypotheses.base_points = c.tct_base_points;
  so.hypotheses.directions = c.tct_directions;
  TctOptions to;
  to.mode = c.tct_mode == "weak" ? TctMode::Weak : TctMode::Exact;
  to.delta = c.tct_delta;
  to.slack = c.tol("tct");
  std::vector<TctReport> rows(c.sample_count);
  parallel_for(c.sample_count, jobs, [&](int i) {
    std::uint64_t rs = row_seed(c.seed, i);
    TctReport& r = rows[i];
    try {
      auto a = sample_admissible_triangle(chart, S, rs, 0, so);
      if (!a) {
        r.status = TctStatus::Inconclusive;
        r.note = "no admissible triangle";
      } else {
        r = verify_tct(chart, a->triangle, S, &a->hypotheses, to);
      }
    } catch (const Error& e) {
      r.status = TctStatus::Inconclusive;
      r.note = e.what();
    }
    r.seed = rs;
    spdlog::debug("tct {}: {}", i, to_string(r.status));
  });
  write_csv(rows, dir + "/tct.csv");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    tally(o, r.status);
    if (r.status == TctStatus::Pass || r.status == TctStatus::Fail)
      if (std::isfinite(r.min_margin)) worst = std::min(worst, r.min_margin);
  }
  o.files = {dir + "/tct.csv"};
  o.summary.push_back("chart: " + chart.name() + ", model: " + S.name() + ", mode: " + c.tct_mode);
  o.summary.push_back("worst angle margin = " + num(worst));
}

}  // namespace

SuiteOutcome run_suite(const ExperimentConfig& c, const std::string& out_dir, int jobs) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + out_dir + ": " + ec.message());
  SuiteOutcome o;
  spdlog::info("suite {} seed {} samples {} jobs {}", c.suite, c.seed, c.sample_count, jobs);
  if (c.suite == "profile") suite_profile(c, out_dir, o);
  if (c.suite == "curvature") suite_curvature(c, out_dir, jobs, o);
  if (c.suite == "angles") suite_angles(c, out_dir, jobs, o);
  if (c.suite == "key_lemma") suite_key_lemma(c, out_dir, jobs, o);
  if (c.suite == "double_triangle") suite_double_triangle(c, out_dir, jobs, o);
  if (c.suite == "tct") suite_tct(c, out_dir, jobs, o);

  std::ofstream summary(out_dir + "/summary.txt");
  if (!summary) fail(ErrorKind::IoError, "cannot write " + out_dir + "/summary.txt");
  summary << "suite: " << c.suite << "\nseed: " << c.seed << "\n";
  for (const auto& line : o.summary) summary << line << '\n';
  summary << "PASS " << o.pass << ", FAIL " << o.fail << ", NOT_APPLICABLE " << o.not_applicable
          << ", INCONCLUSIVE " << o.inconclusive << '\n';
  summary << "status: " << (o.exit_code() == 0 ? "PASS" : "FAIL") << '\n';
  o.files.push_back(out_dir + "/summary.txt");
  return o;
}

}  // namespace ftct::cli
