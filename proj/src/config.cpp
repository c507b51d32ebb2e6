#include "cechstat/config.hpp"

#include <algorithm>

namespace cechstat {

StrictObject::StrictObject(const nlohmann::json& source, std::string path)
    : source_(source.is_null() ? nlohmann::json::object() : source), path_(std::move(path)) {
  if (!source_.is_object()) throw ConfigError(path_ + " must be a JSON object");
}

bool StrictObject::has(const std::string& key) const { return source_.contains(key); }

StrictObject StrictObject::child(const std::string& key) {
  seen_.push_back(key);
  return StrictObject(source_.contains(key) ? source_.at(key) : nlohmann::json::object(),
                      path_ + "." + key);
}

void StrictObject::finish() {
  for (const auto& item : source_.items())
    if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end())
      throw ConfigError("unknown key " + path_ + "." + item.key());
}

Density parse_density(StrictObject& obj) {
  const auto kind_name = obj.get<std::string>("kind", "uniform-cube");
  DensityKind kind;
  try {
    kind = density_kind_from_string(kind_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(obj.path() + ": " + e.what());
  }
  try {
    switch (kind) {
      case DensityKind::UniformCube: {
        const auto d = obj.get<std::size_t>("d", 2);
        const auto side = obj.get<double>("side", 1.0);
        obj.finish();
        return Density::uniform_cube(d, side);
      }
      case DensityKind::TruncatedGaussian: {
        const auto d = obj.get<std::size_t>("d", 2);
        const auto scale = obj.get<double>("scale", 0.2);
        const auto half = obj.get<double>("half_width", 0.0);
        obj.finish();
        auto density = Density::truncated_gaussian(d, scale, half);
        obj.put("half_width", density.half_width());
        return density;
      }
      case DensityKind::CustomGrid: {
        const auto lo = obj.require<std::vector<double>>("lo");
        const auto hi = obj.require<std::vector<double>>("hi");
        const auto shape = obj.require<std::vector<std::size_t>>("shape");
        const auto values = obj.require<std::vector<double>>("values");
        obj.finish();
        return Density::custom_grid(Box{lo, hi}, shape, values);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(obj.path() + ": " + e.what());
  }
  throw ConfigError(obj.path() + ": unsupported density");
}

nlohmann::json density_to_json(const Density& density) {
  switch (density.kind()) {
    case DensityKind::UniformCube:
      return {{"kind", "uniform-cube"}, {"d", density.dim()}, {"side", density.side()}};
    case DensityKind::TruncatedGaussian:
      return {{"kind", "truncated-gaussian"}, {"d", density.dim()}, {"scale", density.scale()},
              {"half_width", density.half_width()}};
    case DensityKind::CustomGrid:
      return {{"kind", "custom-grid"}, {"lo", density.support_box().lo},
              {"hi", density.support_box().hi}, {"shape", density.grid_shape()},
              {"values", density.grid_values()}};
  }
  return nullptr;
}

namespace {

Density density_block(StrictObject& parent) {
  auto obj = parent.child("density");
  auto density = parse_density(obj);
  parent.put("density", obj.resolved());
  return density;
}

ClusterOptions parse_cluster(StrictObject& obj) {
  ClusterOptions o;
  const auto form = obj.get<std::string>("void_form", "derived");
  if (form == "derived") o.void_form = VoidForm::Derived;
  else if (form == "literal") o.void_form = VoidForm::Literal;
  else throw ConfigError(obj.path() + ".void_form must be 'derived' or 'literal'");
  const auto sampler = obj.get<std::string>("sampler", "tree");
  if (sampler == "tree") o.sampler = ClusterSampler::Tree;
  else if (sampler == "box") o.sampler = ClusterSampler::Box;
  else throw ConfigError(obj.path() + ".sampler must be 'tree' or 'box'");
  o.inner = obj.get<int>("inner", o.inner);
  if (o.inner < 1) throw ConfigError(obj.path() + ".inner must be >= 1");
  o.box_scale = obj.get<double>("box_scale", o.box_scale);
  return o;
}

}  // namespace

RegimeConfig parse_regime(StrictObject& obj, std::uint64_t seed) {
  RegimeConfig c;
  c.regime = regime_from_string(obj.get<std::string>("regime", "sparse"));
  c.density = density_block(obj);
  c.k = obj.get<int>("k", 1);
  std::vector<double> default_n, default_grid;
  double default_t = 1.0;
  switch (c.regime) {
    case Regime::Sparse:
      default_n = {1024, 2048, 4096, 8192, 16384};
      default_grid = {1.0};
      break;
    case Regime::Critical:
      default_n = {1000, 3000, 5000};
      default_grid = {0.15, 0.25, 0.3};
      default_t = 0.3;
      break;
    case Regime::Poisson:
      default_n = {2000};
      default_grid = {0.8, 1.0, 1.2};
      break;
  }
  c.n_list = obj.get<std::vector<double>>("n_list", default_n);
  c.gamma = obj.get<double>("gamma", 0.65);
  c.grid = obj.get<std::vector<double>>("grid", default_grid);
  c.check_t = obj.get<double>("check_t", default_t);
  c.replicates = obj.get<std::size_t>("replicates", 100);
  c.M = obj.get<int>("M", c.k + 3);
  c.budget = obj.get<std::size_t>("budget", kDefaultSimplexBudget);
  c.seed = seed;

  auto th = obj.child("thresholds");
  c.thresholds.sparse_mean_rel = th.get<double>("sparse_mean_rel", 0.15);
  c.thresholds.sparse_var_rel = th.get<double>("sparse_var_rel", 0.15);
  c.thresholds.sparse_skewness = th.get<double>("sparse_skewness", 0.25);
  c.thresholds.sparse_excess_kurtosis = th.get<double>("sparse_excess_kurtosis", 0.5);
  c.thresholds.critical_mean_rel = th.get<double>("critical_mean_rel", 0.10);
  c.thresholds.critical_var_rel = th.get<double>("critical_var_rel", 0.20);
  c.thresholds.poisson_mean_rel = th.get<double>("poisson_mean_rel", 0.10);
  c.thresholds.poisson_min_p = th.get<double>("poisson_min_p", 0.01);
  c.thresholds.connectivity_std_errors = th.get<double>("connectivity_std_errors", 3.0);
  th.finish();
  obj.put("thresholds", th.resolved());

  auto cb = obj.child("constants");
  c.constants.mu_samples = cb.get<std::size_t>("mu_samples", 1'000'000);
  c.constants.volume_samples = cb.get<std::size_t>("volume_samples", 1'000'000);
  c.constants.eta_samples = cb.get<std::size_t>("eta_samples", 200'000);
  c.constants.limit_replicates = cb.get<std::size_t>("limit_replicates", 0);
  auto cl = cb.child("cluster");
  c.constants.cluster = parse_cluster(cl);
  cl.finish();
  cb.put("cluster", cl.resolved());
  cb.finish();
  obj.put("constants", cb.resolved());
  obj.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(obj.path() + ": " + e.what());
  }
  return c;
}

CliConfig parse_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override) {
  CliConfig cfg;
  StrictObject root(doc, "config");
  cfg.seed = root.get<std::uint64_t>("seed", 1);
  if (seed_override) {
    cfg.seed = *seed_override;
    root.put("seed", cfg.seed);
  }
  cfg.threads = root.get<unsigned>("threads", 0);
  cfg.out = root.get<std::string>("out", "out");

  if (root.has("sample")) {
    auto obj = root.child("sample");
    SampleConfig s;
    s.density = density_block(obj);
    s.n = obj.get<double>("n", 1000.0);
    s.scale = obj.get<double>("scale", 1.0);
    s.seed = cfg.seed;
    if (!(s.n > 0.0)) throw ConfigError("config.sample.n must be positive");
    if (!(s.scale > 0.0)) throw ConfigError("config.sample.scale must be positive");
    obj.finish();
    root.put("sample", obj.resolved());
    cfg.sample = s;
  }
  if (root.has("betti")) {
    auto obj = root.child("betti");
    BettiConfig b;
    if (obj.has("input")) b.input = obj.get<std::string>("input", "");
    b.density = density_block(obj);
    b.n = obj.get<double>("n", 100.0);
    b.scale = obj.get<double>("scale", 1.0);
    b.k = obj.get<int>("k", 1);
    b.t_max = obj.get<double>("t_max", 1.0);
    b.grid = obj.get<std::vector<double>>("grid", std::vector<double>{b.t_max});
    b.budget = obj.get<std::size_t>("budget", kDefaultSimplexBudget);
    b.seed = cfg.seed;
    if (!(b.t_max > 0.0)) throw ConfigError("config.betti.t_max must be positive");
    if (!std::is_sorted(b.grid.begin(), b.grid.end()) || b.grid.empty() || b.grid.back() > b.t_max ||
        b.grid.front() <= 0.0)
      throw ConfigError("config.betti.grid must be increasing within (0, t_max]");
    obj.finish();
    root.put("betti", obj.resolved());
    cfg.betti = b;
  }
  if (root.has("constants")) {
    auto obj = root.child("constants");
    ConstantsConfig c;
    c.density = density_block(obj);
    c.seed = cfg.seed;
    const auto requests = obj.get<nlohmann::json>("requests", nlohmann::json::array());
    if (!requests.is_array()) throw ConfigError("config.constants.requests must be an array");
    nlohmann::json resolved_requests = nlohmann::json::array();
    for (std::size_t a = 0; a < requests.size(); ++a) {
      StrictObject r(requests[a], "config.constants.requests[" + std::to_string(a) + "]");
      ConstantRequest req;
      req.name = r.require<std::string>("name");
      const int k = r.get<int>("k", 1);
      if (req.name == "c_f_k") {
      } else if (req.name == "d1_volume") {
        const auto sign = r.get<std::string>("sign", "+");
        if (sign != "+" && sign != "-") throw ConfigError(r.path() + ".sign must be '+' or '-'");
        r.get<double>("t", 1.0);
        r.get<std::size_t>("samples", 1'000'000);
      } else if (req.name == "mu") {
        r.get<double>("t1", 1.0);
        r.get<double>("t2", 1.0);
        r.get<std::size_t>("samples", 1'000'000);
      } else if (req.name == "union_ball_volume") {
        r.require<std::vector<std::vector<double>>>("centers");
        r.require<double>("r");
        r.get<std::size_t>("samples", 1'000'000);
      } else if (req.name == "eta") {
        r.get<int>("i", k + 2);
        r.get<int>("j1", 1);
        r.get<int>("j2", 1);
        r.get<double>("t1", 0.3);
        r.get<double>("t2", 0.3);
        r.get<std::size_t>("samples", 200'000);
        auto cl = r.child("cluster");
        parse_cluster(cl);
        cl.finish();
        r.put("cluster", cl.resolved());
      } else if (req.name == "nu") {
        r.get<int>("i1", k + 2);
        r.get<int>("i2", k + 2);
        r.get<int>("j1", 1);
        r.get<int>("j2", 1);
        r.get<double>("t1", 0.3);
        r.get<double>("t2", 0.3);
        r.get<std::size_t>("samples", 200'000);
        auto cl = r.child("cluster");
        parse_cluster(cl);
        cl.finish();
        r.put("cluster", cl.resolved());
      } else if (req.name == "phi_truncated") {
        r.get<int>("M", k + 2);
        r.get<std::vector<double>>("grid", std::vector<double>{0.3});
        r.get<std::size_t>("samples", 200'000);
        auto cl = r.child("cluster");
        parse_cluster(cl);
        cl.finish();
        r.put("cluster", cl.resolved());
      } else {
        throw ConfigError(r.path() + ".name '" + req.name + "' is not a known constant");
      }
      r.finish();
      req.params = r.resolved();
      resolved_requests.push_back(req.params);
      c.requests.push_back(std::move(req));
    }
    obj.put("requests", resolved_requests);
    obj.finish();
    root.put("constants", obj.resolved());
    cfg.constants = c;
  }
  if (root.has("experiment")) {
    auto obj = root.child("experiment");
    cfg.experiment = parse_regime(obj, cfg.seed);
    root.put("experiment", obj.resolved());
  }
  root.finish();
  cfg.resolved = root.resolved();
  return cfg;
}

nlohmann::json evaluate_constant(const ConstantRequest& request, const Density& density,
                                 std::uint64_t seed) {
  StrictObject p(request.params, "request");
  const auto& name = request.name;
  p.get<std::string>("name", name);
  const int k = p.get<int>("k", 1);
  const Box region = density.support_box();
  auto cluster_of = [&] {
    auto cl = p.child("cluster");
    auto o = parse_cluster(cl);
    return o;
  };
  try {
    if (name == "c_f_k") {
      const double v = c_f_k(density, k);
      return to_json(McEstimate{v, 0.0, 0, seed}, name, request.params);
    }
    if (name == "d1_volume") {
      const auto sign = p.get<std::string>("sign", "+") == "+" ? Sign::Plus : Sign::Minus;
      const auto t = p.get<double>("t", 1.0);
      const auto e = volume_D(k, density.dim(), sign, t, p.get<std::size_t>("samples", 0), seed);
      return to_json(e, name, request.params);
    }
    if (name == "mu") {
      const auto e = mu(k, region, p.get<double>("t1", 1.0), p.get<double>("t2", 1.0), density,
                        p.get<std::size_t>("samples", 0), seed);
      return to_json(e, name, request.params);
    }
    if (name == "union_ball_volume") {
      const auto centers = p.get<std::vector<std::vector<double>>>("centers", {});
      std::vector<double> flat;
      std::size_t d = 0;
      for (const auto& c : centers) {
        if (d == 0) d = c.size();
        if (c.size() != d || d == 0) throw ConfigError("centers must share one positive dimension");
        flat.insert(flat.end(), c.begin(), c.end());
      }
      if (d == 0) throw ConfigError("union_ball_volume needs at least one center");
      const auto e = union_ball_volume(flat, d, p.get<double>("r", 0.0), p.get<std::size_t>("samples", 0), seed);
      return to_json(e, name, request.params);
    }
    if (name == "eta") {
      const auto e = eta(k, p.get<int>("i", 0), p.get<int>("j1", 0), p.get<int>("j2", 0),
                         p.get<double>("t1", 0.0), p.get<double>("t2", 0.0), density, region,
                         p.get<std::size_t>("samples", 0), seed, cluster_of());
      return to_json(e, name, request.params);
    }
    if (name == "nu") {
      const auto e = nu(k, p.get<int>("i1", 0), p.get<int>("i2", 0), p.get<int>("j1", 0),
                        p.get<int>("j2", 0), p.get<double>("t1", 0.0), p.get<double>("t2", 0.0),
                        density, region, p.get<std::size_t>("samples", 0), seed, cluster_of());
      return to_json(e, name, request.params);
    }
    if (name == "phi_truncated") {
      const auto grid = p.get<std::vector<double>>("grid", {});
      const auto c = phi_truncated(p.get<int>("M", 0), k, grid, density, region,
                                   p.get<std::size_t>("samples", 0), seed, cluster_of());
      auto j = to_json(c);
      return {{"name", name}, {"params", request.params}, {"value", j["values"]},
              {"std_error", j["std_errors"]}, {"samples", p.get<std::size_t>("samples", 0)},
              {"seed", seed}};
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("constant '" + name + "': " + e.what());
  }
  throw ConfigError("unknown constant '" + name + "'");
}

}  // namespace cechstat
