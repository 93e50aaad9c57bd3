#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dynet/bench.hpp"
#include "dynet/netgen.hpp"
#include "dynet/network.hpp"
#include "dynet/regression.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
  if (g_log_level >= 1) std::cerr << "[info] " << msg << "\n";
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return std::numeric_limits<double>::infinity();
  return std::stod(s);
}

int cmd_generate(const dynet::GenConfig& gen, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const dynet::GeneratedBenchmarkCase bc = dynet::generate_case(gen);

  json manifest;
  manifest["schema"] = "dynet/v1";
  manifest["seed"] = bc.seed;
  manifest["experiments"] = gen.L;
  manifest["truth"] = "truth.json";
  write_text(fs::path(out_dir) / "truth.json", dynet::to_json(bc.truth).dump(2));
  for (int l = 0; l < gen.L; ++l) {
    const std::string model_name = "model_" + std::to_string(l) + ".json";
    const std::string data_name = "experiment_" + std::to_string(l) + ".csv";
    write_text(fs::path(out_dir) / model_name, dynet::to_json(bc.models[l]).dump(2));
    dynet::write_experiment_csv((fs::path(out_dir) / data_name).string(), bc.data[l]);
    manifest["models"].push_back(model_name);
    manifest["data"].push_back(data_name);
  }
  manifest["realized_snr_db"] = bc.realized_snr_db;
  write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2));
  log_info("case written to " + out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruction of sparse dynamic network structure from multi-experiment time series"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string config_path, out_path = ".";
  int jobs = 1;
  std::string log_level = "info";
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_path, "output directory or file");
  app.add_option("--jobs", jobs, "worker threads");
  app.add_option("--log-level", log_level, "quiet|info|debug");

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Generate a random stable network case");
  dynet::GenConfig gen;
  std::string snr_str = "10";
  gen_cmd->add_option("--p", gen.p, "number of nodes");
  gen_cmd->add_option("--density", gen.density, "arc density of the p x p structure");
  gen_cmd->add_option("--experiments", gen.L, "number of experiments");
  gen_cmd->add_option("--samples", gen.N, "samples per experiment");
  gen_cmd->add_option("--snr", snr_str, "SNR in dB, or inf");
  gen_cmd->add_option("--perturbation", gen.perturbation, "replica perturbation magnitude");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a model to a time-series CSV");
  std::string model_path;
  int sim_samples = 500;
  std::string sim_snr = "inf";
  sim_cmd->add_option("--model", model_path, "network model JSON")->required();
  sim_cmd->add_option("--samples", sim_samples, "number of samples");
  sim_cmd->add_option("--snr", sim_snr, "SNR in dB, or inf");

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "Infer the Boolean structure from CSV data");
  std::vector<std::string> csv_paths;
  dynet::ReconstructionConfig rc;
  rec_cmd->add_option("csv", csv_paths, "experiment CSV files")->required();
  rec_cmd->add_option("--method", rc.method, "girl1|gsbl|gsmc");
  rec_cmd->add_option("--order", rc.order, "lag order per group");
  rec_cmd->add_option("--lambda", rc.l1.lambda, "group penalty weight");
  bool no_standardize = false;
  rec_cmd->add_flag("--no-standardize", no_standardize,
                    "skip the per-channel unit-variance rescaling");

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "Monte Carlo structure-recovery benchmark");
  int bench_trials = -1;

  bench_cmd->add_option("--trials", bench_trials, "number of trials");

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "Compare two network JSON files");
  std::string truth_path, est_path;
  met_cmd->add_option("truth", truth_path, "ground-truth network JSON")->required();
  met_cmd->add_option("estimate", est_path, "estimated network JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (log_level == "quiet") g_log_level = 0;
  else if (log_level == "debug") g_log_level = 2;

  try {
    if (gen_cmd->parsed()) {
      gen.seed = seed;
      gen.snr_db = parse_snr(snr_str);
      return cmd_generate(gen, out_path);
    }

    if (sim_cmd->parsed()) {
      const dynet::ArxNetworkModel model = dynet::arx_from_json(load_json(model_path));
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::MatrixXd u(sim_samples, model.m);
      for (int t = 0; t < sim_samples; ++t)
        for (int k = 0; k < model.m; ++k) u(t, k) = normal(rng);
      const dynet::ExperimentData data =
          dynet::simulate_arx(model, u, parse_snr(sim_snr), rng);
      const std::string out_file =
          fs::is_directory(out_path) ? (fs::path(out_path) / "experiment.csv").string() : out_path;
      dynet::write_experiment_csv(out_file, data);
      log_info("trajectory written to " + out_file);
      return 0;
    }

    if (rec_cmd->parsed()) {
      std::vector<dynet::ExperimentData> data;
      for (const auto& path : csv_paths) {
        if (!fs::exists(path)) throw std::invalid_argument("missing file: " + path);
        data.push_back(dynet::read_experiment_csv(path));
      }
      if (config_path.size()) {
        const json j = load_json(config_path);
        rc.method = j.value("method", rc.method);
        rc.order = j.value("order", rc.order);
        rc.l1.lambda = j.value("lambda", rc.l1.lambda);
        rc.mcmc.chain_length = j.value("chain_length", rc.mcmc.chain_length);
        rc.mcmc.burn_in = j.value("burn_in", rc.mcmc.burn_in);
        rc.standardize = j.value("standardize", rc.standardize);
      }
      if (no_standardize) rc.standardize = false;
      rc.mcmc.seed = seed;
      const dynet::ReconstructionResult rec = dynet::reconstruct_network(data, rc);
      fs::create_directories(out_path);
      write_text(fs::path(out_path) / "network.json", dynet::to_json(rec.network).dump(2));
      for (size_t i = 0; i < rec.per_output.size(); ++i)
        write_text(fs::path(out_path) / ("result_" + std::to_string(i) + ".json"),
                   rec.per_output[i].to_json().dump(2));
      std::cout << dynet::to_json(rec.network).dump(2) << "\n";
      return 0;
    }

    if (bench_cmd->parsed()) {
      dynet::BenchmarkConfig cfg;
      if (config_path.size()) cfg = dynet::BenchmarkConfig::from_json(load_json(config_path));
      if (bench_trials > 0) cfg.trials = bench_trials;
      if (jobs > 0) cfg.jobs = jobs;
      if (app.count("--seed")) cfg.seed = seed;
      const dynet::BenchmarkReport report = dynet::run_benchmark(cfg);
      fs::create_directories(out_path);
      write_text(fs::path(out_path) / "report.json", report.to_json().dump(2));
      write_text(fs::path(out_path) / "trials.csv", report.to_csv());
      for (size_t k = 0; k < cfg.methods.size(); ++k)
        std::cout << cfg.methods[k] << ": precision " << report.mean_precision[k] << " +- "
                  << report.sd_precision[k] << ", tpr " << report.mean_tpr[k] << " +- "
                  << report.sd_tpr[k] << "\n";
      return report.failures == 0 ? 0 : 2;
    }

    if (met_cmd->parsed()) {
      if (!fs::exists(truth_path)) throw std::invalid_argument("missing file: " + truth_path);
      if (!fs::exists(est_path)) throw std::invalid_argument("missing file: " + est_path);
      const dynet::BooleanNetwork truth = dynet::boolean_from_json(load_json(truth_path));
      const dynet::BooleanNetwork est = dynet::boolean_from_json(load_json(est_path));
      const dynet::StructureMetrics m = dynet::structure_metrics(est, truth, truth.m > 0);
      std::cout << "precision " << m.precision() << "\ntpr " << m.tpr() << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
