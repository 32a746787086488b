#include "lrp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lrp/cluster.hpp"
#include "lrp/estimators.hpp"
#include "lrp/kernel.hpp"
#include "lrp/metric.hpp"
#include "lrp/parallel.hpp"
#include "lrp/renorm.hpp"
#include "lrp/sampler.hpp"
#include "lrp/walk.hpp"

namespace lrp::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(std::int64_t v) { return std::to_string(v); }

std::string fmt_point(const Point& p, int dim) {
  std::string s;
  for (int i = 0; i < dim; ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s;
}

// "k=v;k=v" in the given order
std::string kv(std::initializer_list<std::pair<std::string, std::string>> items) {
  std::string s;
  for (const auto& [k, v] : items) s += (s.empty() ? "" : ";") + k + "=" + v;
  return s;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  fail(ErrorCode::ConfigParse, "config key '" + key + "': " + why);
}

class Params {
 public:
  explicit Params(const ExperimentConfig& c) : c_(c) {}

  bool has(const std::string& key) const { return c_.values.count(key) > 0; }

  std::string str(const std::string& key) const {
    auto it = c_.values.find(key);
    if (it == c_.values.end()) bad(key, "missing");
    return it->second;
  }
  std::string str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }

  double num(const std::string& key) const { return to_double(key, str(key)); }
  double num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

  std::int64_t integer(const std::string& key) const { return to_int(key, str(key)); }
  std::int64_t integer(const std::string& key, std::int64_t def) const { return has(key) ? integer(key) : def; }

  std::uint64_t u64(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    const auto s = str(key);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) bad(key, "not an unsigned integer: '" + s + "'");
    return v;
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const auto s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad(key, "not a boolean: '" + s + "'");
  }

  std::vector<std::int64_t> ints(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& t : split(str(key), ',')) out.push_back(to_int(key, t));
    if (out.empty()) bad(key, "empty list");
    return out;
  }
  std::vector<double> nums(const std::string& key) const {
    std::vector<double> out;
    for (const auto& t : split(str(key), ',')) out.push_back(to_double(key, t));
    if (out.empty()) bad(key, "empty list");
    return out;
  }

  // "x1,x2;y1,y2;..."
  std::vector<Point> points(const std::string& key, int dim) const {
    std::vector<Point> out;
    for (const auto& t : split(str(key), ';')) {
      const auto cs = split(t, ',');
      if (static_cast<int>(cs.size()) != dim) bad(key, "point '" + t + "' does not have " + std::to_string(dim) + " coordinates");
      Point p{};
      for (int i = 0; i < dim; ++i) p[i] = to_int(key, cs[static_cast<std::size_t>(i)]);
      out.push_back(p);
    }
    return out;
  }

  static double to_double(const std::string& key, const std::string& s) {
    if (s == "inf") return kInf;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) bad(key, "not a number: '" + s + "'");
    return v;
  }
  static std::int64_t to_int(const std::string& key, const std::string& s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) bad(key, "not an integer: '" + s + "'");
    return v;
  }

 private:
  const ExperimentConfig& c_;
};

// --- model section ---------------------------------------------------------------

struct Model {
  int dim = 2;
  bool pf = false;
  std::optional<Kernel> kernel;
  std::optional<ShortEdgeFunction> sf;
  double beta = 0.0;
  double miss_budget = 1e-3;

  const Kernel& k() const {
    if (!kernel) fail(ErrorCode::ConfigParse, "this experiment needs model.model = betaJ and model.kernel");
    return *kernel;
  }
  ConfigSource source() const { return pf ? pf_source(*sf, miss_budget) : kernel_source(*kernel, beta, miss_budget); }
};

Model read_model(const Params& p, bool need_beta) {
  Model m;
  m.dim = static_cast<int>(p.integer("model.dim", 2));
  if (m.dim < 1 || m.dim > 4) bad("model.dim", "must be in 1..4");
  const auto kind = p.str("model.model", "betaJ");
  if (kind == "pf") {
    m.pf = true;
    m.sf = parse_short_edge_function(p.str("model.pf"), m.dim);
  } else if (kind == "betaJ") {
    m.kernel = parse_kernel(p.str("model.kernel"), m.dim);
  } else {
    bad("model.model", "expected betaJ or pf");
  }
  if (need_beta && !m.pf) {
    m.beta = p.num("model.beta");
    if (m.beta < 0) bad("model.beta", "must be nonnegative");
  }
  m.miss_budget = p.num("model.miss_budget", 1e-3);
  if (!(m.miss_budget > 0 && m.miss_budget < 1)) bad("model.miss_budget", "must lie in (0, 1)");
  return m;
}

std::size_t read_replicates(const Params& p, std::size_t def) {
  const auto r = p.integer("replicates", static_cast<std::int64_t>(def));
  if (r < 1) bad("replicates", "must be positive");
  return static_cast<std::size_t>(r);
}

std::vector<std::int64_t> positive_ints(const Params& p, const std::string& key) {
  auto v = p.ints(key);
  for (auto x : v)
    if (x < 1) bad(key, "entries must be positive");
  return v;
}

Row row(const std::string& est, std::string params, const Estimate& e) {
  return {est, std::move(params), e.value, e.stderr, e.replicates, e.seed};
}
Row row(const std::string& est, std::string params, double value, double se, std::size_t reps, std::uint64_t seed) {
  return {est, std::move(params), value, se, reps, seed};
}

struct Ctx {
  const Params& p;
  std::uint64_t seed;
  unsigned workers;
  ExperimentOutput& out;
};

BetacSettings read_betac(const Params& p, std::uint64_t seed, unsigned workers, double miss_budget) {
  BetacSettings st;
  st.schedule = positive_ints(p, "geometry.schedule");
  st.tol = p.num("estimator.tol", 0.05);
  st.criterion = parse_criterion(p.str("estimator.criterion", "boundary_crossing_half"));
  st.replicates = read_replicates(p, 200);
  st.seed = seed;
  st.miss_budget = miss_budget;
  st.workers = workers;
  return st;
}

// --- experiments -----------------------------------------------------------------------

void run_sample(Ctx& c) {
  auto m = read_model(c.p, true);
  const auto n = c.p.integer("geometry.n");
  const auto stream = static_cast<std::uint32_t>(c.p.integer("estimator.stream", 0));
  const bool dump = c.p.flag("output.config", false);
  if (n < 1) bad("geometry.n", "must be positive");

  const Box box{m.dim, Point{}, n};
  const CouplingField field{c.seed, stream};
  BoxConfig cfg = m.pf ? sample_box_pf(*m.sf, box, field, m.miss_budget) : sample_box(*m.kernel, m.beta, box, field, m.miss_budget);
  ClusterForest forest(cfg);
  const double nv = static_cast<double>(cfg.vertex_count());
  const auto prm = kv({{"n", fmt(n)}, {"stream", fmt(std::int64_t{stream})}});
  auto& rows = c.out.rows;
  rows.push_back(row("vertices", prm, nv, 0, 1, c.seed));
  rows.push_back(row("open_edges", prm, static_cast<double>(cfg.edge_count()), 0, 1, c.seed));
  rows.push_back(row("mean_degree", prm, 2.0 * static_cast<double>(cfg.edge_count()) / nv, 0, 1, c.seed));
  rows.push_back(row("largest_cluster_density", prm, largest_cluster(cfg, forest).size / nv, 0, 1, c.seed));
  rows.push_back(row("components", prm, static_cast<double>(forest.component_count()), 0, 1, c.seed));
  rows.push_back(row("cutoff_length", prm, static_cast<double>(cfg.provenance().cutoff_length), 0, 1, c.seed));
  rows.push_back(row("skipped_bound", prm, cfg.provenance().skipped_bound, 0, 1, c.seed));
  if (dump) c.out.files["sample_config.txt"] = serialize(cfg);
}

void run_theta(Ctx& c) {
  auto m = read_model(c.p, true);
  const auto radii = positive_ints(c.p, "geometry.radii");
  const auto reps = read_replicates(c.p, 100);
  auto src = m.source();
  for (auto n : radii) {
    const auto prm = kv({{"n", fmt(n)}});
    c.out.rows.push_back(row("theta_density", prm, theta_density(src, m.dim, n, reps, c.seed, nullptr, c.workers)));
    c.out.rows.push_back(row("boundary_connection", prm, boundary_connection_prob(src, m.dim, n, reps, c.seed, c.workers)));
  }
}

void betac_rows(Ctx& c, const std::string& prefix, const BetaBracket& b, std::string& curves, const std::string& label) {
  auto& rows = c.out.rows;
  const auto prm = kv({{"kernel", label}, {"low", fmt(b.low)}, {"high", fmt(b.high)}});
  rows.push_back(row(prefix + "_midpoint", prm, b.midpoint(), b.stderr, b.replicates, b.seed));
  rows.push_back(row(prefix + "_low", prm, b.low, 0, b.replicates, b.seed));
  rows.push_back(row(prefix + "_high", prm, b.high, 0, b.replicates, b.seed));
  rows.push_back(row(prefix + "_gw_bound", prm, b.gw_bound, 0, b.replicates, b.seed));
  for (const auto& cv : b.curves) {
    rows.push_back(row(prefix + "_crossing", kv({{"kernel", label}, {"n", fmt(cv.radius)}}), cv.crossing, cv.crossing_stderr,
                       b.replicates, b.seed));
    for (std::size_t i = 0; i < cv.beta.size(); ++i)
      curves += label + "," + fmt(cv.radius) + "," + fmt(cv.beta[i]) + "," + fmt(cv.value[i]) + "\n";
  }
}

void run_betac(Ctx& c) {
  auto m = read_model(c.p, false);
  auto st = read_betac(c.p, c.seed, c.workers, m.miss_budget);
  std::string curves = "kernel,n,beta,value\n";
  auto b = betac_bracket(m.k(), st);
  betac_rows(c, "betac", b, curves, m.k().spec());
  c.out.files["betac_curves.csv"] = curves;
}

void run_locality(Ctx& c) {
  auto m = read_model(c.p, false);
  auto st = read_betac(c.p, c.seed, c.workers, m.miss_budget);
  const auto ns = c.p.nums("estimator.truncations");
  for (std::size_t i = 0; i + 1 < ns.size(); ++i)
    if (!(ns[i] < ns[i + 1])) bad("estimator.truncations", "must be increasing");
  const bool bonus = c.p.has("estimator.nn_bonus");
  const double nn_bonus = c.p.num("estimator.nn_bonus", 0.0);

  std::string curves = "kernel,n,beta,value\n";
  for (const auto& e : locality_sweep(m.k(), ns, st)) {
    const auto& b = e.bracket;
    c.out.rows.push_back(row("locality_midpoint", kv({{"N", fmt(e.radius)}, {"low", fmt(b.low)}, {"high", fmt(b.high)}}),
                             b.midpoint(), b.stderr, b.replicates, b.seed));
    for (const auto& cv : b.curves)
      for (std::size_t i = 0; i < cv.beta.size(); ++i)
        curves += "N=" + fmt(e.radius) + "," + fmt(cv.radius) + "," + fmt(cv.beta[i]) + "," + fmt(cv.value[i]) + "\n";
  }
  if (bonus) {
    auto b = betac_bracket(Kernel::perturbed_nn(m.k(), nn_bonus), st);
    c.out.rows.push_back(row("jbar_midpoint",
                             kv({{"nn_bonus", fmt(nn_bonus)}, {"low", fmt(b.low)}, {"high", fmt(b.high)}}), b.midpoint(),
                             b.stderr, b.replicates, b.seed));
  }
  c.out.files["locality_curves.csv"] = curves;
}

void run_phi(Ctx& c) {
  auto m = read_model(c.p, true);
  const auto s = c.p.points("estimator.set", m.dim);
  PhiMode mode;
  const auto kind = c.p.str("estimator.mode", "exact");
  if (kind != "exact" && kind != "mc") bad("estimator.mode", "expected exact or mc");
  mode.exact = kind == "exact";
  mode.replicates = read_replicates(c.p, 1000);
  mode.seed = c.seed;
  auto r = phi_value(m.k(), m.beta, s, mode);
  const auto prm = kv({{"beta", fmt(m.beta)}, {"size", fmt(static_cast<std::int64_t>(s.size()))}, {"mode", kind}});
  const std::size_t reps = mode.exact ? 1 : mode.replicates;
  c.out.rows.push_back(row("phi", prm, r.value, r.stderr, reps, c.seed));
  c.out.rows.push_back(row("phi_upper", prm, r.upper, 0, reps, c.seed));
  c.out.rows.push_back(row("phi_certified", prm, r.certified ? 1.0 : 0.0, 0, reps, c.seed));
}

void run_distance(Ctx& c) {
  auto m = read_model(c.p, true);
  const auto radii = positive_ints(c.p, "geometry.radii");
  const auto reps = read_replicates(c.p, 50);
  Point dir{};
  dir[0] = 1;
  if (c.p.has("estimator.direction")) dir = c.p.points("estimator.direction", m.dim).at(0);
  MuOptions opt;
  opt.margin = c.p.integer("estimator.margin", 8);
  opt.workers = c.workers;
  const double factor = c.p.num("estimator.factor", 8.0);
  const bool far = c.p.has("estimator.far_n");
  const auto far_n = c.p.integer("estimator.far_n", 0);
  const auto far_inner = c.p.integer(
      "estimator.far_inner", static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(std::max<std::int64_t>(far_n, 1)), 1.0 / 16.0))));
  const auto far_window = c.p.integer("estimator.far_window", 64);
  const auto far_reps = static_cast<std::size_t>(c.p.integer("estimator.far_replicates", static_cast<std::int64_t>(reps)));

  auto src = m.source();
  const auto dstr = fmt_point(dir, m.dim);
  for (const auto& r : mu_sequence(src, m.dim, dir, radii, reps, c.seed, opt)) {
    const auto prm = kv({{"n", fmt(r.n)}, {"direction", dstr}});
    c.out.rows.push_back(row("mu_ratio", prm, r.mean, r.stderr, r.replicates, c.seed));
    c.out.rows.push_back(row("subadditivity_violations", prm, static_cast<double>(r.subadditivity_violations), 0,
                             r.replicates, c.seed));
    c.out.rows.push_back(row("empty_proxies", prm, static_cast<double>(r.empty_proxies), 0, reps, c.seed));
  }
  for (auto n : radii) {
    auto t = distance_tail_probe(src, m.dim, n, factor, reps, c.seed, c.workers);
    const auto prm = kv({{"n", fmt(n)}, {"factor", fmt(factor)}});
    c.out.rows.push_back(row("distance_tail", prm, t.frequency));
    c.out.rows.push_back(row("max_distance_over_n", prm, t.mean_distance, 0, reps, c.seed));
  }
  if (far) {
    auto e = far_pair_probe(src, m.dim, far_n, far_inner, far_window, far_reps, c.seed, c.workers);
    c.out.rows.push_back(
        row("far_pair", kv({{"n", fmt(far_n)}, {"inner", fmt(far_inner)}, {"window", fmt(far_window)}}), e));
  }
}

void run_shape(Ctx& c) {
  auto m = read_model(c.p, true);
  const auto ts = positive_ints(c.p, "geometry.radii");
  const auto reps = read_replicates(c.p, 20);
  const auto mu_n = c.p.integer("estimator.mu_n", *std::max_element(ts.begin(), ts.end()));
  const auto mu_reps = static_cast<std::size_t>(c.p.integer("estimator.mu_replicates", static_cast<std::int64_t>(reps)));
  const double eps = c.p.num("estimator.eps", 0.25);
  const auto margin = c.p.integer("estimator.margin", 8);
  if (mu_n < 1) bad("estimator.mu_n", "must be positive");

  auto src = m.source();
  MuOptions opt;
  opt.margin = margin;
  opt.workers = c.workers;
  Point axis{}, diag{};
  axis[0] = 1;
  for (int i = 0; i < m.dim; ++i) diag[i] = 1;
  const std::int64_t nn[] = {mu_n};
  const auto ra = mu_sequence(src, m.dim, axis, nn, mu_reps, derive_seed(c.seed, 1), opt).at(0);
  const auto rd = mu_sequence(src, m.dim, diag, nn, mu_reps, derive_seed(c.seed, 2), opt).at(0);
  c.out.rows.push_back(row("mu_axis", kv({{"n", fmt(mu_n)}}), ra.mean, ra.stderr, ra.replicates, derive_seed(c.seed, 1)));
  c.out.rows.push_back(row("mu_diagonal", kv({{"n", fmt(mu_n)}}), rd.mean, rd.stderr, rd.replicates, derive_seed(c.seed, 2)));
  const auto mu = MuTable::uniform(m.dim, ra.mean, rd.mean);

  // one configuration per replicate, large enough for the largest t
  const double reach = static_cast<double>(*std::max_element(ts.begin(), ts.end())) / std::min(ra.mean, rd.mean);
  const auto radius = static_cast<std::int64_t>(std::ceil(1.5 * reach)) + margin;
  const Region working = Region::box(m.dim, Point{}, radius);
  const Region enlarged = enlarged_box(working);
  auto viol = parallel_map<std::vector<double>>(
      reps,
      [&](std::size_t r) {
        auto cfg = src(enlarged, derive_seed(c.seed, r));
        auto proxy = make_proxy(cfg, working);
        std::vector<double> v;
        for (auto t : ts) {
          if (proxy.empty()) {
            v.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
          }
          std::vector<Point> ball;
          // the proxy only stands for the infinite cluster inside the working box
          for (auto z : chemical_ball(cfg, proxy, Point{}, static_cast<std::uint32_t>(t)))
            if (working.contains(cfg.point(z))) ball.push_back(cfg.point(z));
          v.push_back(shape_check(ball, static_cast<std::uint32_t>(t), mu, eps).violation);
        }
        return v;
      },
      c.workers);

  std::string per = "replicate,t,violation\n";
  for (std::size_t j = 0; j < ts.size(); ++j) {
    std::vector<double> xs;
    for (std::size_t r = 0; r < reps; ++r) {
      per += std::to_string(r) + "," + fmt(ts[j]) + "," + fmt(viol[r][j]) + "\n";
      if (!std::isnan(viol[r][j])) xs.push_back(viol[r][j]);
    }
    auto s = summarize(xs);
    c.out.rows.push_back(row("shape_violation", kv({{"t", fmt(ts[j])}, {"eps", fmt(eps)}}), s.mean, s.stderr, s.n, c.seed));
    if (j == 0) continue;
    std::size_t paired = 0, shrink = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (std::isnan(viol[r][j]) || std::isnan(viol[r][j - 1])) continue;
      ++paired;
      shrink += viol[r][j] <= viol[r][j - 1];
    }
    c.out.rows.push_back(row("shape_pairs_nonincreasing", kv({{"t_from", fmt(ts[j - 1])}, {"t_to", fmt(ts[j])}}),
                             paired ? static_cast<double>(shrink) / static_cast<double>(paired) : 0.0, 0, paired, c.seed));
  }
  c.out.files["shape_violations.csv"] = per;
}

void run_giant(Ctx& c) {
  auto m = read_model(c.p, true);
  const auto radii = positive_ints(c.p, "geometry.radii");
  const auto reps = read_replicates(c.p, 20);
  auto src = m.source();
  for (auto n : radii) {
    const auto prm = kv({{"n", fmt(n)}});
    auto e = theta_density(src, m.dim, n, reps, c.seed, nullptr, c.workers);
    c.out.rows.push_back(row("giant_density", prm, e));
    c.out.rows.push_back(row("giant_density_sd", prm, e.sd, 0, e.replicates, c.seed));
    c.out.rows.push_back(row("theta_boundary", prm, boundary_connection_prob(src, m.dim, n, reps, c.seed, c.workers)));
  }
}

void run_walk(Ctx& c) {
  auto m = read_model(c.p, true);
  const auto radii = positive_ints(c.p, "geometry.radii");
  const auto reps = read_replicates(c.p, 4);
  const auto box = c.p.integer("estimator.box", 2 * radii.back());
  const auto horizon = c.p.integer("estimator.horizon", 10000);
  const auto walks = static_cast<std::size_t>(c.p.integer("estimator.walks", 200));
  if (box < radii.back()) bad("estimator.box", "must be at least the largest radius");
  if (horizon < 1 || walks < 1) bad("estimator.horizon", "horizon and walks must be positive");

  const Region region = Region::box(m.dim, Point{}, box);
  auto src = m.source();
  struct Rep {
    std::vector<double> resistance;
    std::vector<double> hits;
  };
  // configurations in sequence; walks and solves are the expensive parts
  std::vector<Rep> out(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto cfg = src(region, derive_seed(c.seed, r));
    ClusterForest forest(cfg);
    const auto big = largest_cluster(cfg, forest);
    // start: vertex of the largest cluster nearest the origin, lexicographic ties
    std::uint32_t start = big.representative;
    std::int64_t best = norm_inf(cfg.point(start));
    for (std::uint32_t v = 0; v < cfg.vertex_count(); ++v) {
      if (!forest.connected(v, big.representative)) continue;
      const auto d = norm_inf(cfg.point(v));
      if (d < best || (d == best && cfg.point(v) < cfg.point(start))) {
        best = d;
        start = v;
      }
    }
    const Point center = cfg.point(start);
    for (auto n : radii) out[r].resistance.push_back(effective_resistance(cfg, start, box_exterior(cfg, center, n)));
    auto e = return_frequency(cfg, start, static_cast<std::uint64_t>(horizon), walks, derive_seed(c.seed, r), c.workers);
    const auto h = static_cast<std::size_t>(std::llround(e.value * static_cast<double>(walks)));
    out[r].hits.assign(walks, 0.0);
    std::fill_n(out[r].hits.begin(), h, 1.0);
  }
  for (std::size_t j = 0; j < radii.size(); ++j) {
    std::vector<double> xs;
    for (const auto& o : out) xs.push_back(o.resistance[j]);
    auto s = summarize(xs);
    c.out.rows.push_back(row("resistance", kv({{"d", fmt(std::int64_t{m.dim})}, {"beta", fmt(m.beta)}, {"n", fmt(radii[j])}}),
                             s.mean, s.stderr, reps, c.seed));
    if (j == 0) continue;
    xs.clear();
    for (const auto& o : out) xs.push_back(o.resistance[j] / o.resistance[j - 1]);
    s = summarize(xs);
    c.out.rows.push_back(row("resistance_ratio",
                             kv({{"d", fmt(std::int64_t{m.dim})}, {"from", fmt(radii[j - 1])}, {"to", fmt(radii[j])}}), s.mean,
                             s.stderr, reps, c.seed));
  }
  std::vector<double> all;
  for (const auto& o : out) all.insert(all.end(), o.hits.begin(), o.hits.end());
  auto e = make_estimate(all, c.seed, "mc-return-frequency");
  c.out.rows.push_back(row("return_frequency",
                           kv({{"d", fmt(std::int64_t{m.dim})}, {"beta", fmt(m.beta)}, {"horizon", fmt(horizon)}}), e));
}

ExplorationParams read_exploration(const Params& p) {
  ExplorationParams e;
  e.n = p.integer("estimator.n", 8);
  e.m = p.integer("estimator.m", 1);
  e.max_edge = p.integer("estimator.max_edge", 0);
  e.depth = static_cast<int>(p.integer("estimator.depth", 20));
  e.beta_tilde = p.num("estimator.beta_tilde", std::numeric_limits<double>::quiet_NaN());
  e.eta = p.num("estimator.eta", std::numeric_limits<double>::quiet_NaN());
  if (e.n < 1 || e.m < 0 || e.depth < 0) bad("estimator.n", "need n >= 1, m >= 0, depth >= 0");
  return e;
}

void run_renorm(Ctx& c) {
  auto m = read_model(c.p, true);
  auto ep = read_exploration(c.p);
  const auto reps = read_replicates(c.p, 50);
  const bool calibrate = c.p.has("estimator.pads");
  std::vector<std::pair<std::int64_t, std::int64_t>> cand;
  if (calibrate) {
    for (const auto& t : split(c.p.str("estimator.pads"), ',')) {
      const auto nm = split(t, ':');
      if (nm.size() != 2) bad("estimator.pads", "expected n:m pairs");
      cand.emplace_back(Params::to_int("estimator.pads", nm[0]), Params::to_int("estimator.pads", nm[1]));
    }
  }
  const double delta = c.p.num("estimator.pad_delta", 1.0);
  const double target = c.p.num("estimator.pad_target", 0.9);
  const auto pad_reps = static_cast<std::size_t>(c.p.integer("estimator.pad_replicates", 50));

  if (calibrate) {
    auto cal = calibrate_pads(m.k(), m.beta, cand, delta, target, pad_reps, derive_seed(c.seed, 0xCA1), c.workers);
    c.out.rows.push_back(row("pad_probe", kv({{"n", fmt(cal.n)}, {"m", fmt(cal.m)}, {"delta", fmt(delta)},
                                              {"reached", cal.reached ? "1" : "0"}}),
                             cal.probe));
    ep.n = cal.n;
    ep.m = cal.m;
  }
  auto s = exploration_survival(m.k(), m.beta, ep, reps, c.seed, c.workers);
  const auto prm = kv({{"n", fmt(ep.n)}, {"m", fmt(ep.m)}, {"depth", fmt(std::int64_t{ep.depth})}, {"beta", fmt(m.beta)}});
  c.out.rows.push_back(row("exploration_survival", prm, s.survival));
  c.out.rows.push_back(row("certified_paths", prm, static_cast<double>(s.certified), 0, reps, c.seed));
  c.out.rows.push_back(row("surviving_runs", prm, static_cast<double>(s.survived), 0, reps, c.seed));
  c.out.rows.push_back(row("longest_certified_edge", prm, static_cast<double>(s.longest_edge), 0, reps, c.seed));
  c.out.rows.push_back(row("mean_survival_depth", prm, s.mean_depth, 0, reps, c.seed));

  // step trace of the first replicate
  auto one = directed_exploration(m.k(), m.beta, ep, derive_seed(c.seed, 0));
  std::string trace = "k,active,blocks_sampled,edges_drawn\n";
  for (const auto& st : one.trace)
    trace += std::to_string(st.k) + "," + std::to_string(st.active) + "," + std::to_string(st.blocks_sampled) + "," +
             std::to_string(st.edges_drawn) + "\n";
  c.out.files["renorm_trace.csv"] = trace;
}

void run_dsb(Ctx& c) {
  const auto rhos = c.p.nums("estimator.rho");
  const auto depth = static_cast<int>(c.p.integer("estimator.depth", 30));
  const auto width = c.p.integer("estimator.width", 0);
  const auto reps = read_replicates(c.p, 1000);
  for (double rho : rhos)
    if (rho < 0 || rho > 1) bad("estimator.rho", "must lie in [0, 1]");
  if (depth < 0 || width < 0) bad("estimator.depth", "depth and width must be nonnegative");
  for (double rho : rhos) {
    const auto prm = kv({{"rho", fmt(rho)}, {"depth", fmt(std::int64_t{depth})}, {"width", fmt(width)}});
    c.out.rows.push_back(row("dsb_survival", prm, directed_survival(DirectedModel{rho, {}, width}, depth, reps, c.seed, c.workers)));
    if (width >= 1 && width <= 20)
      c.out.rows.push_back(row("dsb_exact", prm, directed_survival_exact(rho, depth, static_cast<int>(width)), 0, 1, c.seed));
  }
}

void run_depthpad(Ctx& c) {
  auto m = read_model(c.p, true);
  const double r = c.p.num("estimator.r", kInf);
  const auto n_cap = c.p.integer("estimator.n_cap", 2);
  const auto ks = positive_ints(c.p, "estimator.k");
  const auto reps = read_replicates(c.p, 100);
  auto src = m.source();
  for (auto k : ks) {
    auto res = depth_no_pad_probe(src, m.dim, r, n_cap, k, reps, c.seed, c.workers);
    const auto prm = kv({{"k", fmt(k)}, {"r", fmt(r)}, {"N", fmt(n_cap)}, {"K", fmt(res.box_side)}});
    c.out.rows.push_back(row("depth_no_pad", prm, res.frequency));
    c.out.rows.push_back(row("boxes_explored", prm, res.mean_boxes, 0, reps, c.seed));
  }
}

void run_counterexample1d(Ctx& c) {
  const int dim = static_cast<int>(c.p.integer("model.dim", 1));
  if (dim != 1) bad("model.dim", "the counterexample lives in d = 1");
  const double p = c.p.num("estimator.p");
  const double gamma_f = c.p.num("estimator.f_gamma");
  const double s = c.p.num("estimator.f_exponent");
  const double gamma = c.p.num("estimator.gamma");
  const auto ns = positive_ints(c.p, "estimator.n");
  const auto radius = c.p.integer("geometry.n");
  const auto reps = read_replicates(c.p, 50);
  const double mb = c.p.num("model.miss_budget", 1e-3);
  if (gamma <= 1) bad("estimator.gamma", "must exceed 1");
  if (radius < 1) bad("geometry.n", "must be positive");

  const auto f = ShortEdgeFunction::power(1, p, gamma_f, s);
  auto base = theta_density(pf_source(f, mb), 1, radius, reps, c.seed, nullptr, c.workers);
  c.out.rows.push_back(row("density_f", kv({{"p", fmt(p)}, {"box", fmt(radius)}}), base));
  for (auto n : ns) {
    auto fn = make_counterexample_1d(f, gamma, n);
    auto e = theta_density(pf_source(fn, mb), 1, radius, reps, c.seed, nullptr, c.workers);
    c.out.rows.push_back(row("density_fn", kv({{"p", fmt(p)}, {"n", fmt(n)}, {"gamma", fmt(gamma)}, {"box", fmt(radius)}}), e));
  }
}

using Runner = void (*)(Ctx&);

struct Experiment {
  const char* name;
  Runner run;
  std::vector<std::string> keys;
};

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r = {
      {"sample", run_sample, {"geometry.n", "estimator.stream", "output.config"}},
      {"theta", run_theta, {"geometry.radii"}},
      {"betac", run_betac, {"geometry.schedule", "estimator.tol", "estimator.criterion"}},
      {"locality",
       run_locality,
       {"geometry.schedule", "estimator.tol", "estimator.criterion", "estimator.truncations", "estimator.nn_bonus"}},
      {"phi", run_phi, {"estimator.set", "estimator.mode"}},
      {"distance",
       run_distance,
       {"geometry.radii", "estimator.direction", "estimator.margin", "estimator.factor", "estimator.far_n",
        "estimator.far_inner", "estimator.far_window", "estimator.far_replicates"}},
      {"shape",
       run_shape,
       {"geometry.radii", "estimator.mu_n", "estimator.mu_replicates", "estimator.eps", "estimator.margin"}},
      {"giant", run_giant, {"geometry.radii"}},
      {"walk", run_walk, {"geometry.radii", "estimator.box", "estimator.horizon", "estimator.walks"}},
      {"renorm",
       run_renorm,
       {"estimator.n", "estimator.m", "estimator.max_edge", "estimator.depth", "estimator.beta_tilde", "estimator.eta",
        "estimator.pads", "estimator.pad_delta", "estimator.pad_target", "estimator.pad_replicates"}},
      {"dsb", run_dsb, {"estimator.rho", "estimator.depth", "estimator.width"}},
      {"depthpad", run_depthpad, {"estimator.r", "estimator.n_cap", "estimator.k"}},
      {"counterexample1d",
       run_counterexample1d,
       {"estimator.p", "estimator.f_gamma", "estimator.f_exponent", "estimator.gamma", "estimator.n", "geometry.n"}},
  };
  return r;
}

const Experiment& lookup(const std::string& name) {
  for (const auto& e : registry())
    if (name == e.name) return e;
  fail(ErrorCode::UnknownExperiment, "unknown experiment '" + name + "'");
}

const std::vector<std::string> kCommonKeys = {"experiment",  "seed",          "replicates", "model.dim",
                                              "model.model", "model.kernel",  "model.pf",   "model.beta",
                                              "model.miss_budget"};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) fail(ErrorCode::ConfigParse, where + "malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ConfigParse, where + "expected key = value");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) fail(ErrorCode::ConfigParse, where + "empty key");
    const auto full = section.empty() ? key : section + "." + key;
    if (!c.values.emplace(full, value).second) fail(ErrorCode::ConfigParse, where + "duplicate key '" + full + "'");
  }
  auto it = c.values.find("experiment");
  if (it == c.values.end()) fail(ErrorCode::ConfigParse, "missing 'experiment'");
  c.experiment = it->second;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigParse, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.emplace_back(e.name);
  return out;
}

std::vector<std::string> allowed_keys(const std::string& experiment) {
  auto keys = kCommonKeys;
  const auto& e = lookup(experiment);
  keys.insert(keys.end(), e.keys.begin(), e.keys.end());
  return keys;
}

ExperimentOutput run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto& exp = lookup(config.experiment);
  const auto keys = allowed_keys(config.experiment);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : config.values)
    if (!allowed.count(k)) fail(ErrorCode::ConfigParse, "unknown key '" + k + "' for experiment " + config.experiment);

  Params p(config);
  ExperimentOutput out;
  out.experiment = config.experiment;
  out.seed = options.seed ? *options.seed : p.u64("seed", 1);
  out.config = config.values;
  out.config["seed"] = std::to_string(out.seed);
  Ctx ctx{p, out.seed, options.workers, out};
  exp.run(ctx);
  return out;
}

std::string to_csv(const ExperimentOutput& out) {
  std::string s(kCsvHeader);
  s += "\n";
  for (const auto& r : out.rows) {
    s += csv_field(out.experiment) + "," + csv_field(r.estimator) + "," + csv_field(r.parameters) + "," + fmt(r.value) +
         "," + fmt(r.stderr) + "," + std::to_string(r.replicates) + "," + std::to_string(r.seed) + "\n";
  }
  return s;
}

std::string to_json(const ExperimentOutput& out) {
  nlohmann::ordered_json j;
  j["experiment"] = out.experiment;
  j["seed"] = out.seed;
  j["config"] = nlohmann::json(out.config);
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : out.rows) {
    nlohmann::ordered_json o;
    o["estimator"] = r.estimator;
    o["parameters"] = r.parameters;
    // text keeps inf and nan intact and the bytes identical to the CSV
    o["value"] = fmt(r.value);
    o["stderr"] = fmt(r.stderr);
    o["replicates"] = r.replicates;
    o["seed"] = r.seed;
    rows.push_back(std::move(o));
  }
  std::vector<std::string> files;
  for (const auto& [name, _] : out.files) files.push_back(name);
  j["files"] = files;
  return j.dump(2) + "\n";
}

void write_outputs(const ExperimentOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) fail(ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
    f << text;
  };
  put(out.experiment + ".csv", to_csv(out));
  put(out.experiment + ".json", to_json(out));
  for (const auto& [name, text] : out.files) put(name, text);
}

int exit_code(ErrorCode code) {
  return code == ErrorCode::ConfigParse || code == ErrorCode::UnknownExperiment ? 2 : 3;
}

}  // namespace lrp::cli
