#include "lrp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "lrp/error.hpp"

namespace lrp {

// --- BoxConfig --------------------------------------------------------------

BoxConfig::BoxConfig(Region region, std::vector<EdgeIndex> edges, Provenance provenance)
    : region_(std::move(region)), provenance_(std::move(provenance)) {
  const std::size_t n = region_.size();
  for (auto& e : edges) {
    require(e.first < n && e.second < n, ErrorCode::InvalidArgument, "edge endpoint outside the region");
    require(e.first != e.second, ErrorCode::SelfLoop, "self-loop in configuration");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  offsets_.assign(n + 1, 0);
  for (const auto& [a, b] : edges) {
    ++offsets_[a + 1];
    ++offsets_[b + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  neighbors_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    neighbors_[fill[a]++] = b;
    neighbors_[fill[b]++] = a;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
  }
}

bool BoxConfig::has_edge(std::uint32_t a, std::uint32_t b) const {
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::vector<EdgeIndex> BoxConfig::edges() const {
  std::vector<EdgeIndex> out;
  out.reserve(edge_count());
  for (std::uint32_t a = 0; a < vertex_count(); ++a) {
    for (auto b : neighbors(a)) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

BoxConfig BoxConfig::filter_max_length(std::int64_t max_length) const {
  std::vector<EdgeIndex> kept;
  for (const auto& [a, b] : edges()) {
    if (norm_inf(point(a) - point(b)) <= max_length) kept.emplace_back(a, b);
  }
  return BoxConfig(region_, std::move(kept), provenance_);
}

BoxConfig BoxConfig::with_edges(std::span<const EdgeIndex> extra) const {
  auto all = edges();
  all.insert(all.end(), extra.begin(), extra.end());
  return BoxConfig(region_, std::move(all), provenance_);
}

double SampledEdge::threshold() const {
  if (weight <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-uniform) / weight;
}

// --- sampling ---------------------------------------------------------------

namespace {

using coupling_detail::band_upper;
using coupling_detail::kBandCount;
using coupling_detail::tile_side;
using coupling_detail::TileWalker;
using coupling_detail::uniform_in_band;

std::int64_t half_classes_up_to(int dim, std::int64_t len) {
  double c = std::pow(2.0 * static_cast<double>(len) + 1.0, dim);
  return static_cast<std::int64_t>(std::min(c, 9e18) / 2);
}

// Calls fn(v) for every lex-positive v of the shell |v|_inf = len.
template <class Fn>
void for_each_in_shell(int dim, std::int64_t len, Fn&& fn) {
  Point v{};
  detail::shell_recurse(dim, 0, len, false, v, fn);
}

// Emits every open edge of displacement v (lex-positive) inside region.
void sample_class(const CouplingField& field, const Region& region, const Point& v, double p, double weight,
                  std::vector<SampledEdge>& out, std::vector<std::uint32_t>& seen, std::uint32_t stamp) {
  if (p <= 0.0) return;
  const int dim = region.dim();
  const Region base = region.intersect(region.translate(-v));
  if (base.empty()) return;

  int band_max = 0;
  while (band_max < kBandCount - 1 && band_upper(band_max) < p) ++band_max;

  for (int band = 0; band <= band_max; ++band) {
    const std::int64_t side = tile_side(band, dim);
    Point tlo{}, thi{};
    for (int i = 0; i < dim; ++i) {
      tlo[i] = floor_div(base.lo()[i] + coupling_detail::kTileOffset, side);
      thi[i] = floor_div(base.hi()[i] + coupling_detail::kTileOffset, side);
    }
    Point tile = tlo;
    while (true) {
      TileWalker walker(field, v, band, tile, dim);
      for (std::int64_t pos; (pos = walker.next()) >= 0;) {
        Point x{};
        std::int64_t rest = pos;
        for (int i = 0; i < dim; ++i) {
          x[i] = tile[i] * side + rest % side - coupling_detail::kTileOffset;
          rest /= side;
        }
        if (!base.contains(x)) continue;
        const std::size_t ia = region.index(x);
        // seen[ia] == stamp: already claimed by a lower band of this class
        if (seen[ia] == stamp) continue;
        if (band < band_max) seen[ia] = stamp;
        const Point y = x + v;
        const double u = uniform_in_band(field, x, y, band, dim);
        if (u < p) {
          out.push_back({static_cast<std::uint32_t>(ia), static_cast<std::uint32_t>(region.index(y)), u, weight});
        }
      }
      int i = 0;
      for (; i < dim; ++i) {
        if (tile[i] < thi[i]) {
          ++tile[i];
          break;
        }
        tile[i] = tlo[i];
      }
      if (i == dim) break;
    }
  }
}

struct ClassLaw {
  std::function<double(const Point&)> weight;    // J(v) or f(v)
  std::function<double(double)> probability;     // weight -> open probability
  std::function<double(const Point&)> mass;      // what `total` sums; differs from weight on the pf nn layer
  double rate;                                   // bound factor: beta for betaJ, 1 for pf
  double total;                                  // sum over v != 0 of weight
  double support;                                // weights vanish beyond this (inf if unbounded)
};

EdgeSample run_sampler(const ClassLaw& law, const Region& region, const CouplingField& field,
                       const SampleOptions& options, std::optional<std::int64_t> forced_cutoff) {
  require(options.miss_budget > 0.0 && options.miss_budget <= 1.0, ErrorCode::InvalidArgument,
          "miss_budget must lie in (0,1]");
  require(region.size() < (std::size_t{1} << 32), ErrorCode::InvalidArgument, "region too large");
  const int dim = region.dim();
  EdgeSample out;
  out.region = region;

  std::int64_t diameter = 0;
  for (int i = 0; i < dim; ++i) diameter = std::max(diameter, region.extent(i) - 1);
  std::int64_t max_len = diameter;
  if (forced_cutoff) max_len = std::min(max_len, *forced_cutoff);
  if (std::isfinite(law.support)) {
    max_len = std::min(max_len, static_cast<std::int64_t>(std::floor(law.support)));
  }

  const double volume = static_cast<double>(region.size());
  const bool budgeted = !options.exact && !forced_cutoff && !std::isfinite(law.support);
  double remaining = law.total;
  std::vector<std::uint32_t> seen(region.size(), 0);
  std::uint32_t stamp = 0;
  std::int64_t len = 0;
  bool met = !budgeted;
  if (budgeted && volume * law.rate * remaining < options.miss_budget) met = true;

  while (len < max_len && !(budgeted && met)) {
    ++len;
    if (budgeted && static_cast<std::size_t>(half_classes_up_to(dim, len)) > options.max_classes) {
      fail(ErrorCode::BudgetInfeasible, "kernel tail cannot meet miss budget " +
                                            std::to_string(options.miss_budget) + " within " +
                                            std::to_string(options.max_classes) + " displacement classes");
    }
    double shell = 0.0;
    for_each_in_shell(dim, len, [&](const Point& v) {
      ++out.classes;
      const double w = law.weight(v);
      shell += 2.0 * law.mass(v);
      sample_class(field, region, v, law.probability(w), w, out.edges, seen, ++stamp);
    });
    remaining -= shell;
    if (budgeted && volume * law.rate * std::max(remaining, 0.0) < options.miss_budget) met = true;
  }
  out.cutoff_length = len;
  // Beyond the diameter or the support nothing is skipped.
  if (len >= diameter || (std::isfinite(law.support) && static_cast<double>(len) >= law.support)) {
    out.skipped_bound = 0.0;
  } else {
    out.skipped_bound = volume * law.rate * std::max(remaining, 0.0);
  }
  return out;
}

double finite_support(const Kernel::Asymptotic& a) {
  return a.prefactor > 0.0 ? std::numeric_limits<double>::infinity() : a.radius;
}

ClassLaw beta_law(const Kernel& k, double beta) {
  require(beta >= 0.0, ErrorCode::InvalidArgument, "beta must be >= 0");
  ClassLaw law;
  law.weight = [k](const Point& v) { return k(v); };
  law.mass = law.weight;
  law.probability = [beta](double w) { return open_probability_from_weight(beta, w); };
  law.rate = beta;
  law.support = beta == 0.0 ? 0.0 : finite_support(k.asymptotic());
  law.total = std::isfinite(law.support) ? 0.0 : total_mass(k);
  return law;
}

ClassLaw pf_law(const ShortEdgeFunction& sf) {
  ClassLaw law;
  law.weight = [sf](const Point& v) { return sf(v); };
  law.mass = [sf](const Point& v) { return sf.f(v); };
  law.probability = [](double w) { return w; };
  law.rate = 1.0;
  double support = finite_support(sf.long_part().asymptotic());
  law.support = std::isfinite(support) ? std::max(support, 1.0) : support;
  // f-mass of the long part; the nearest-neighbor layer is always enumerated.
  law.total = std::isfinite(law.support) ? 0.0 : total_mass(sf.long_part());
  return law;
}

Provenance base_provenance(const std::string& model, const std::string& spec, double beta, const CouplingField& field,
                           double miss_budget, const EdgeSample& s) {
  Provenance p;
  p.model = model;
  p.kernel_spec = spec;
  p.beta = beta;
  p.seed = field.seed;
  p.streams = {field.stream};
  p.miss_budget = miss_budget;
  p.cutoff_length = s.cutoff_length;
  p.skipped_bound = s.skipped_bound;
  return p;
}

BoxConfig to_config(const EdgeSample& s, Provenance provenance) {
  std::vector<EdgeIndex> edges;
  edges.reserve(s.edges.size());
  for (const auto& e : s.edges) edges.emplace_back(e.a, e.b);
  return BoxConfig(s.region, std::move(edges), std::move(provenance));
}

}  // namespace

EdgeSample sample_edges(const Kernel& k, double beta, const Region& region, const CouplingField& field,
                        const SampleOptions& options) {
  require(k.dim() == region.dim(), ErrorCode::DimensionMismatch, "kernel and region dimensions differ");
  return run_sampler(beta_law(k, beta), region, field, options, std::nullopt);
}

EdgeSample sample_edges_pf(const ShortEdgeFunction& sf, const Region& region, const CouplingField& field,
                           const SampleOptions& options) {
  require(sf.dim() == region.dim(), ErrorCode::DimensionMismatch, "short-edge function and region dimensions differ");
  return run_sampler(pf_law(sf), region, field, options, std::nullopt);
}

BoxConfig sample_region(const Kernel& k, double beta, const Region& region, const CouplingField& field,
                        const SampleOptions& options) {
  auto s = sample_edges(k, beta, region, field, options);
  return to_config(s, base_provenance("betaJ", k.spec(), beta, field, options.miss_budget, s));
}

BoxConfig sample_box(const Kernel& k, double beta, const Box& box, const CouplingField& field, double miss_budget) {
  SampleOptions o;
  o.miss_budget = miss_budget;
  return sample_region(k, beta, box.region(), field, o);
}

BoxConfig sample_box_pf(const ShortEdgeFunction& sf, const Box& box, const CouplingField& field, double miss_budget) {
  SampleOptions o;
  o.miss_budget = miss_budget;
  auto s = sample_edges_pf(sf, box.region(), field, o);
  return to_config(s, base_provenance("pf", sf.spec(), 0.0, field, miss_budget, s));
}

BoxConfig config_at_beta(const EdgeSample& sample, double beta, Provenance provenance) {
  std::vector<EdgeIndex> edges;
  for (const auto& e : sample.edges) {
    if (e.uniform < open_probability_from_weight(beta, e.weight)) edges.emplace_back(e.a, e.b);
  }
  return BoxConfig(sample.region, std::move(edges), std::move(provenance));
}

BoxConfig regenerate(const Region& region, const Provenance& provenance) {
  require(provenance.streams.size() == 1, ErrorCode::InvalidArgument,
          "only single-stream configurations can be regenerated");
  const CouplingField field{provenance.seed, provenance.streams.front()};
  SampleOptions o;
  o.miss_budget = provenance.miss_budget;
  EdgeSample s;
  if (provenance.model == "pf") {
    auto sf = parse_short_edge_function(provenance.kernel_spec, region.dim());
    s = run_sampler(pf_law(sf), region, field, o, provenance.cutoff_length);
  } else if (provenance.model == "betaJ") {
    auto k = parse_kernel(provenance.kernel_spec, region.dim());
    s = run_sampler(beta_law(k, provenance.beta), region, field, o, provenance.cutoff_length);
  } else {
    fail(ErrorCode::InvalidArgument, "unknown model '" + provenance.model + "'");
  }
  Provenance p = provenance;
  p.skipped_bound = provenance.skipped_bound;
  return to_config(s, std::move(p));
}

ConfigSource kernel_source(const Kernel& k, double beta, double miss_budget, std::uint32_t stream) {
  return [k, beta, miss_budget, stream](const Region& r, std::uint64_t seed) {
    SampleOptions o;
    o.miss_budget = miss_budget;
    return sample_region(k, beta, r, CouplingField{seed, stream}, o);
  };
}

ConfigSource pf_source(const ShortEdgeFunction& sf, double miss_budget, std::uint32_t stream) {
  return [sf, miss_budget, stream](const Region& r, std::uint64_t seed) {
    SampleOptions o;
    o.miss_budget = miss_budget;
    const CouplingField field{seed, stream};
    auto s = sample_edges_pf(sf, r, field, o);
    return to_config(s, base_provenance("pf", sf.spec(), 0.0, field, miss_budget, s));
  };
}

// --- text format ------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Point parse_coords(const std::string& s, int dim) {
  Point p{};
  std::istringstream is(s);
  std::string tok;
  int i = 0;
  while (std::getline(is, tok, ',')) {
    require(i < dim, ErrorCode::ConfigParse, "too many coordinates in '" + s + "'");
    try {
      std::size_t used = 0;
      p[i++] = std::stoll(tok, &used);
      require(used == tok.size(), ErrorCode::ConfigParse, "bad coordinate '" + tok + "'");
    } catch (const std::logic_error&) {
      fail(ErrorCode::ConfigParse, "bad coordinate '" + tok + "'");
    }
  }
  require(i == dim, ErrorCode::ConfigParse, "expected " + std::to_string(dim) + " coordinates in '" + s + "'");
  return p;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end == s.c_str() + s.size(), ErrorCode::ConfigParse, "bad number '" + s + "'");
  return v;
}

bool is_cube(const Region& r, Point& center, std::int64_t& radius) {
  const std::int64_t e = r.extent(0);
  if (e % 2 == 0) return false;
  for (int i = 1; i < r.dim(); ++i) {
    if (r.extent(i) != e) return false;
  }
  radius = (e - 1) / 2;
  center = Point{};
  for (int i = 0; i < r.dim(); ++i) center[i] = r.lo()[i] + radius;
  return true;
}

}  // namespace

std::string serialize(const BoxConfig& cfg) {
  const auto& r = cfg.region();
  const auto& p = cfg.provenance();
  const int d = r.dim();
  std::ostringstream os;
  os << "# lrp-box d=" << d;
  Point center;
  std::int64_t radius = 0;
  if (is_cube(r, center, radius)) {
    os << " center=" << to_string(center, d) << " radius=" << radius;
  } else {
    os << " lo=" << to_string(r.lo(), d) << " hi=" << to_string(r.hi(), d);
  }
  os << " model=" << p.model << " kernel=" << (p.kernel_spec.empty() ? "-" : p.kernel_spec)
     << " beta=" << fmt(p.beta) << " seed=" << p.seed << " streams=";
  for (std::size_t i = 0; i < p.streams.size(); ++i) os << (i ? "," : "") << p.streams[i];
  if (p.streams.empty()) os << "-";
  os << " miss_budget=" << fmt(p.miss_budget) << " cutoff=" << p.cutoff_length
     << " skipped_bound=" << fmt(p.skipped_bound) << " edges=" << cfg.edge_count() << '\n';
  for (const auto& [a, b] : cfg.edges()) {
    os << to_string(cfg.point(a), d) << ' ' << to_string(cfg.point(b), d) << '\n';
  }
  return os.str();
}

BoxConfig deserialize(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorCode::ConfigParse, "empty configuration text");
  std::istringstream hs(line);
  std::string tok;
  hs >> tok;
  require(tok == "#", ErrorCode::ConfigParse, "missing header");
  hs >> tok;
  require(tok == "lrp-box", ErrorCode::ConfigParse, "not an lrp-box file");

  int d = 0;
  std::string center_s, radius_s, lo_s, hi_s;
  Provenance p;
  std::size_t expected_edges = 0;
  std::vector<std::pair<std::string, std::string>> fields;
  while (hs >> tok) {
    auto eq = tok.find('=');
    require(eq != std::string::npos, ErrorCode::ConfigParse, "bad header field '" + tok + "'");
    fields.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }
  for (const auto& [key, val] : fields) {
    if (key == "d") {
      d = std::stoi(val);
    }
  }
  require(d >= 1 && d <= kMaxDim, ErrorCode::ConfigParse, "bad dimension in header");
  for (const auto& [key, val] : fields) {
    if (key == "d") continue;
    if (key == "center") center_s = val;
    else if (key == "radius") radius_s = val;
    else if (key == "lo") lo_s = val;
    else if (key == "hi") hi_s = val;
    else if (key == "model") p.model = val;
    else if (key == "kernel") p.kernel_spec = val == "-" ? "" : val;
    else if (key == "beta") p.beta = parse_double(val);
    else if (key == "seed") p.seed = std::stoull(val);
    else if (key == "streams") {
      if (val != "-") {
        std::istringstream ss(val);
        std::string s;
        while (std::getline(ss, s, ',')) p.streams.push_back(static_cast<std::uint32_t>(std::stoul(s)));
      }
    } else if (key == "miss_budget") p.miss_budget = parse_double(val);
    else if (key == "cutoff") p.cutoff_length = std::stoll(val);
    else if (key == "skipped_bound") p.skipped_bound = parse_double(val);
    else if (key == "edges") expected_edges = std::stoull(val);
    else fail(ErrorCode::ConfigParse, "unknown header field '" + key + "'");
  }
  Region region;
  if (!center_s.empty()) {
    region = Region::box(d, parse_coords(center_s, d), std::stoll(radius_s));
  } else {
    require(!lo_s.empty() && !hi_s.empty(), ErrorCode::ConfigParse, "header lacks region bounds");
    region = Region(d, parse_coords(lo_s, d), parse_coords(hi_s, d));
  }
  std::vector<EdgeIndex> edges;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream es(line);
    std::string a, b;
    es >> a >> b;
    Point pa = parse_coords(a, d), pb = parse_coords(b, d);
    require(region.contains(pa) && region.contains(pb), ErrorCode::ConfigParse, "edge endpoint outside region");
    edges.emplace_back(static_cast<std::uint32_t>(region.index(pa)), static_cast<std::uint32_t>(region.index(pb)));
  }
  require(edges.size() == expected_edges, ErrorCode::ConfigParse, "edge count does not match header");
  return BoxConfig(region, std::move(edges), std::move(p));
}

}  // namespace lrp
