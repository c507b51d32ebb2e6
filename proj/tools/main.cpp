#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "cechstat/betti_process.hpp"
#include "cechstat/cech.hpp"
#include "cechstat/config.hpp"
#include "cechstat/experiments.hpp"
#include "cechstat/parallel.hpp"

namespace fs = std::filesystem;
using namespace cechstat;

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kConfigError = 2, kBudgetError = 3 };

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw OutputError("cannot write " + path.string());
  return os;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

nlohmann::json versions() {
  return {{"cechstat", "1.0.0"},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

void write_manifest(const fs::path& out, const std::string& command, const CliConfig& cfg,
                    const nlohmann::json& seeds) {
  write_json(out / "manifest.json", {{"command", command},
                                     {"config", cfg.resolved},
                                     {"threads", cfg.threads},
                                     {"versions", versions()},
                                     {"seeds", seeds}});
}

int cmd_sample(const CliConfig& cfg, const fs::path& out) {
  if (!cfg.sample) throw ConfigError("config has no 'sample' block");
  const auto& s = *cfg.sample;
  write_manifest(out, "sample", cfg, {{"base", s.seed}, {"cloud", s.seed}});
  const auto cloud = sample_poisson_process(s.density, s.n, s.seed, s.scale);
  auto os = open_out(out / "cloud.csv");
  write_cloud_csv(os, cloud);
  return kPass;
}

int cmd_betti(const CliConfig& cfg, const fs::path& out) {
  if (!cfg.betti) throw ConfigError("config has no 'betti' block");
  const auto& b = *cfg.betti;
  PointCloud cloud;
  if (b.input) {
    std::ifstream is(*b.input);
    if (!is) throw ConfigError("cannot read input cloud " + *b.input);
    try {
      cloud = read_cloud_csv(is).with_scale(b.scale);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("input cloud: ") + e.what());
    }
  } else {
    cloud = sample_poisson_process(b.density, b.n, b.seed, b.scale);
  }
  write_manifest(out, "betti", cfg, {{"base", b.seed}, {"cloud", b.input ? nlohmann::json(nullptr)
                                                                          : nlohmann::json(b.seed)}});
  if (!cloud.empty() && b.k >= static_cast<int>(cloud.dim()))
    throw ConfigError("betti.k must be below the cloud dimension");

  const auto curve = betti_curve(cloud, b.k, b.t_max, b.budget);
  const auto censuses = census_grid(cloud, b.k, b.grid, b.budget);
  for (const auto& c : censuses) {
    if (c.beta() != curve.value_at(c.t)) {
      std::cerr << "census total " << c.beta() << " disagrees with curve value "
                << curve.value_at(c.t) << " at t=" << c.t << '\n';
      return kCheckFailed;
    }
  }

  std::vector<Barcode> bars;
  if (!cloud.empty()) {
    const auto complex = enumerate_simplices(cloud, b.k + 1, cloud.scale() * b.t_max, b.budget);
    bars = persistence(complex, b.k);
    for (auto& bc : bars)
      for (auto& iv : bc.intervals) {
        iv.birth /= cloud.scale();
        iv.death /= cloud.scale();
      }
  }

  const CurveHeader header{cloud.dim(), b.k, cloud.intensity(), cloud.scale(), b.seed};
  {
    auto os = open_out(out / "curve.csv");
    write_curve_csv(os, header, curve);
  }
  {
    auto os = open_out(out / "barcodes.csv");
    write_barcodes_csv(os, bars);
  }
  {
    auto os = open_out(out / "census.csv");
    write_census_csv(os, header, censuses);
  }
  {
    auto os = open_out(out / "lifetime.csv");
    os.precision(17);
    os << "# d=" << header.d << " k=" << header.k << " n=" << header.n << " scale=" << header.scale
       << " seed=" << header.seed << '\n'
       << "t,lifetime\n";
    for (double t : b.grid) os << t << ',' << lifetime_sum(curve, t) << '\n';
  }
  return kPass;
}

std::uint64_t request_seed(std::uint64_t base, std::size_t index, const ConstantRequest& r) {
  // Both signs of one D_1 volume share a stream, so the pair is ordered
  // sample by sample.
  if (r.name == "d1_volume") {
    const auto t = std::bit_cast<std::uint64_t>(r.params.value("t", 1.0));
    return derive_seed(base, 0xD1, static_cast<std::uint64_t>(r.params.value("k", 1)), t);
  }
  return derive_seed(base, index);
}

int cmd_constants(const CliConfig& cfg, const fs::path& out) {
  if (!cfg.constants) throw ConfigError("config has no 'constants' block");
  const auto& c = *cfg.constants;
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t a = 0; a < c.requests.size(); ++a)
    seeds.push_back(request_seed(c.seed, a, c.requests[a]));
  write_manifest(out, "constants", cfg, {{"base", c.seed}, {"requests", seeds}});

  nlohmann::json records = nlohmann::json::array();
  for (std::size_t a = 0; a < c.requests.size(); ++a)
    records.push_back(evaluate_constant(c.requests[a], c.density, seeds[a].get<std::uint64_t>()));
  write_json(out / "constants.json", records);

  int status = kPass;
  for (std::size_t a = 0; a < records.size(); ++a) {
    const auto& p = c.requests[a].params;
    if (c.requests[a].name != "d1_volume" || p.value("sign", "+") != "-") continue;
    for (std::size_t b = 0; b < records.size(); ++b) {
      const auto& q = c.requests[b].params;
      if (c.requests[b].name == "d1_volume" && q.value("sign", "+") == "+" &&
          q.value("k", 1) == p.value("k", 1) && q.value("t", 1.0) == p.value("t", 1.0) &&
          records[a]["value"].get<double>() > records[b]["value"].get<double>()) {
        std::cerr << "d1_volume: minus volume exceeds plus volume (requests " << a << ", " << b
                  << ")\n";
        status = kCheckFailed;
      }
    }
  }
  return status;
}

int cmd_experiment(const CliConfig& cfg, const fs::path& out) {
  if (!cfg.experiment) throw ConfigError("config has no 'experiment' block");
  const auto& e = *cfg.experiment;
  write_manifest(out, "experiment", cfg, {{"base", e.seed}});
  nlohmann::json report_doc = {{"config", cfg.resolved.at("experiment")}};
  try {
    const auto result = run_experiment(e);
    report_doc["report"] = result.report.to_json();
    report_doc["constants"] = result.constants;
    report_doc["passed"] = result.report.acceptance_passed();
    write_json(out / "report.json", report_doc);
    write_json(out / "summary.json", summary_to_json(result.summary));
    auto os = open_out(out / "summary.csv");
    write_summary_csv(os, result.summary);
    for (const auto& check : result.report.checks)
      std::cout << (check.passed ? "PASS " : "FAIL ") << (check.acceptance ? "" : "(report) ")
                << check.name << '\n';
    return result.report.acceptance_passed() ? kPass : kCheckFailed;
  } catch (const BudgetError& err) {
    report_doc["error"] = {{"kind", "budget"}, {"message", err.what()}, {"n", err.n},
                           {"replicate", err.replicate}};
    report_doc["passed"] = false;
    write_json(out / "report.json", report_doc);
    throw;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Čech complex Betti-number statistics"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "JSON config document")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides config 'out')");
  app.add_option("--seed", seed, "base seed (overrides config 'seed')");
  app.add_option("--threads", threads, "worker threads, 0 for all cores");
  auto* sample = app.add_subcommand("sample", "write a point-cloud CSV");
  auto* betti = app.add_subcommand("betti", "Betti curve, barcodes, component census");
  auto* constants = app.add_subcommand("constants", "Monte Carlo limit constants");
  auto* experiment = app.add_subcommand("experiment", "regime run with checks");
  for (auto* sub : {sample, betti, constants, experiment}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  try {
    nlohmann::json doc;
    {
      std::ifstream is(config_path);
      try {
        doc = nlohmann::json::parse(is);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    if (threads) doc["threads"] = *threads;
    if (!out_dir.empty()) doc["out"] = out_dir;
    auto cfg = parse_config(doc, seed);
    set_default_threads(cfg.threads);
    const fs::path out = cfg.out;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw OutputError("cannot create " + out.string() + ": " + ec.message());

    if (*sample) return cmd_sample(cfg, out);
    if (*betti) return cmd_betti(cfg, out);
    if (*constants) return cmd_constants(cfg, out);
    return cmd_experiment(cfg, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return kBudgetError;
  } catch (const SimplexBudgetExceeded& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return kBudgetError;
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}
