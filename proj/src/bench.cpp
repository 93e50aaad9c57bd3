#include "dynet/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dynet {

StructureMetrics structure_metrics(const BooleanNetwork& estimated, const BooleanNetwork& truth,
                                   bool include_inputs) {
  if (estimated.p != truth.p || (include_inputs && estimated.m != truth.m))
    throw std::invalid_argument("structure_metrics: dimension mismatch");
  StructureMetrics m;
  for (int i = 0; i < truth.p; ++i) {
    for (int j = 0; j < truth.p; ++j) {
      if (i == j) continue;
      const bool t = truth.yy.count({i, j}) > 0;
      const bool e = estimated.yy.count({i, j}) > 0;
      m.tp += t && e;
      m.fp += !t && e;
      m.fn += t && !e;
      m.tn += !t && !e;
    }
  }
  if (include_inputs) {
    for (int i = 0; i < truth.p; ++i) {
      for (int k = 0; k < truth.m; ++k) {
        const bool t = truth.uy.count({i, k}) > 0;
        const bool e = estimated.uy.count({i, k}) > 0;
        m.tp += t && e;
        m.fp += !t && e;
        m.fn += t && !e;
        m.tn += !t && !e;
      }
    }
  }
  m.degenerate_precision = (m.tp + m.fp == 0);
  return m;
}

ReconstructionResult reconstruct_network(const std::vector<ExperimentData>& data,
                                         const ReconstructionConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("reconstruct_network: no data");
  const int p = data.front().p();
  const int m = data.front().m();
  for (const auto& d : data)
    if (d.p() != p || d.m() != m)
      throw std::invalid_argument("reconstruct_network: inconsistent experiment dimensions");

  // Standardize every channel to unit sample variance per experiment. The
  // Boolean structure is invariant under diagonal signal scaling, while the
  // regression becomes far better conditioned and the group penalty acts
  // uniformly across nodes whose signal amplitudes differ by orders of
  // magnitude.
  std::vector<ExperimentData> scaled = data;
  if (cfg.standardize) {
    for (auto& d : scaled) {
      auto scale_columns = [](Eigen::MatrixXd& M) {
        for (int c = 0; c < M.cols(); ++c) {
          const double mu = M.col(c).mean();
          const double sd = std::sqrt((M.col(c).array() - mu).square().sum() / M.rows());
          if (sd > 1e-300) M.col(c) /= sd;
        }
      };
      scale_columns(d.y);
      scale_columns(d.u);
    }
  }

  ReconstructionResult out;
  out.network.p = p;
  out.network.m = m;
  for (int i = 0; i < p; ++i) {
    const GroupOrders orders = GroupOrders::uniform(p, m, i, cfg.order);
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> per_exp;
    for (const auto& d : scaled) per_exp.push_back(build_regressors(d, orders));
    const GroupedRegressionProblem problem = stack_experiments(per_exp, orders);

    SolverResult res;
    if (cfg.method == "girl1") {
      res = solve_irl1(problem, cfg.l1);
    } else if (cfg.method == "gsbl") {
      res = solve_sbl(problem, cfg.sbl);
    } else if (cfg.method == "gsmc") {
      McmcConfig mc = cfg.mcmc;
      mc.seed = splitmix64(cfg.mcmc.seed, static_cast<std::uint64_t>(i));
      res = solve_mcmc(problem, mc);
    } else {
      throw std::invalid_argument("reconstruct_network: unknown method " + cfg.method);
    }

    for (int k = 0; k < problem.groups(); ++k) {
      if (!res.active[k]) continue;
      if (k < p) {
        if (k != i) out.network.yy.insert({i, k});
      } else if (cfg.infer_inputs) {
        out.network.uy.insert({i, k - p});
      }
    }
    out.per_output.push_back(std::move(res));
  }
  // the group decisions are shared across experiments, so every dataset
  // receives the same structure
  out.per_experiment.assign(data.size(), out.network);
  return out;
}

BenchmarkConfig BenchmarkConfig::from_json(const nlohmann::json& j) {
  BenchmarkConfig c;
  c.trials = j.value("trials", c.trials);
  c.gen.p = j.value("p", c.gen.p);
  c.gen.m = j.value("m", c.gen.m);
  c.gen.density = j.value("density", c.gen.density);
  c.gen.L = j.value("experiments", c.gen.L);
  c.gen.N = j.value("samples", c.gen.N);
  c.gen.perturbation = j.value("perturbation", c.gen.perturbation);
  if (j.contains("snr_db")) {
    if (j["snr_db"].is_string())
      c.gen.snr_db = std::numeric_limits<double>::infinity();
    else
      c.gen.snr_db = j["snr_db"].get<double>();
  }
  if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
  c.gsmc_samples = j.value("gsmc_samples", c.gsmc_samples);
  c.standardize = j.value("standardize", c.standardize);
  c.order = j.value("order", c.order);
  c.jobs = j.value("jobs", c.jobs);
  c.seed = j.value("seed", c.seed);
  c.l1.lambda = j.value("lambda", c.l1.lambda);
  c.mcmc.chain_length = j.value("chain_length", c.mcmc.chain_length);
  c.mcmc.burn_in = j.value("burn_in", c.mcmc.burn_in);
  return c;
}

nlohmann::json BenchmarkConfig::to_json() const {
  nlohmann::json j;
  j["schema"] = "dynet/v1";
  j["trials"] = trials;
  j["p"] = gen.p;
  j["m"] = gen.m;
  j["density"] = gen.density;
  j["experiments"] = gen.L;
  j["samples"] = gen.N;
  j["perturbation"] = gen.perturbation;
  if (std::isinf(gen.snr_db))
    j["snr_db"] = "inf";
  else
    j["snr_db"] = gen.snr_db;
  j["methods"] = methods;
  j["gsmc_samples"] = gsmc_samples;
  j["standardize"] = standardize;
  j["order"] = order;
  j["jobs"] = jobs;
  j["seed"] = seed;
  j["lambda"] = l1.lambda;
  j["chain_length"] = mcmc.chain_length;
  j["burn_in"] = mcmc.burn_in;
  return j;
}

namespace {

ExperimentData truncate_experiment(const ExperimentData& d, int n) {
  if (n <= 0 || n >= d.samples()) return d;
  ExperimentData out;
  out.y = d.y.topRows(n);
  out.u = d.u.topRows(n);
  out.sample_period = d.sample_period;
  return out;
}

TrialRow run_trial(const BenchmarkConfig& cfg, int trial) {
  TrialRow row;
  row.trial = trial;
  row.seed = splitmix64(cfg.seed, static_cast<std::uint64_t>(trial));
  try {
    GenConfig g = cfg.gen;
    g.seed = row.seed;
    const GeneratedBenchmarkCase bc = generate_case(g);

    for (const auto& method : cfg.methods) {
      ReconstructionConfig rc;
      rc.method = method;
      rc.order = cfg.order;
      rc.standardize = cfg.standardize;
      rc.l1 = cfg.l1;
      rc.sbl = cfg.sbl;
      rc.mcmc = cfg.mcmc;
      rc.mcmc.seed = splitmix64(row.seed, 7);

      std::vector<ExperimentData> data = bc.data;
      if (method == "gsmc")
        for (auto& d : data) d = truncate_experiment(d, cfg.gsmc_samples);

      const auto t0 = std::chrono::steady_clock::now();
      const ReconstructionResult rec = reconstruct_network(data, rc);
      const auto t1 = std::chrono::steady_clock::now();

      for (const auto& net : rec.per_experiment)
        if (!(net == rec.network)) row.structures_consistent = false;
      row.metrics.push_back(structure_metrics(rec.network, bc.truth, /*include_inputs=*/false));
      row.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
  for (const auto& method : cfg.methods)
    if (method != "girl1" && method != "gsbl" && method != "gsmc")
      throw std::invalid_argument("run_benchmark: unknown method " + method);
  if (cfg.trials <= 0) throw std::invalid_argument("run_benchmark: trials must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  BenchmarkReport report;
  report.config = cfg;
  report.trials.resize(cfg.trials);

  const int jobs = std::max(1, cfg.jobs);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      report.trials[t] = run_trial(cfg, t);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const int nm = static_cast<int>(cfg.methods.size());
  report.mean_precision.assign(nm, 0.0);
  report.sd_precision.assign(nm, 0.0);
  report.mean_tpr.assign(nm, 0.0);
  report.sd_tpr.assign(nm, 0.0);
  for (int k = 0; k < nm; ++k) {
    std::vector<double> prec, tpr;
    for (const auto& row : report.trials) {
      if (!row.ok) continue;
      prec.push_back(row.metrics[k].precision());
      tpr.push_back(row.metrics[k].tpr());
    }
    auto mean_sd = [](const std::vector<double>& v) -> std::pair<double, double> {
      if (v.empty()) return {0.0, 0.0};
      double mu = 0.0;
      for (double x : v) mu += x;
      mu /= v.size();
      double var = 0.0;
      for (double x : v) var += (x - mu) * (x - mu);
      var = v.size() > 1 ? var / (v.size() - 1) : 0.0;
      return {mu, std::sqrt(var)};
    };
    std::tie(report.mean_precision[k], report.sd_precision[k]) = mean_sd(prec);
    std::tie(report.mean_tpr[k], report.sd_tpr[k]) = mean_sd(tpr);
  }
  for (const auto& row : report.trials) report.failures += !row.ok;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json j;
  j["schema"] = "dynet/v1";
  j["config"] = config.to_json();
  j["failures"] = failures;
  j["wall_seconds"] = wall_seconds;
  for (size_t k = 0; k < config.methods.size(); ++k) {
    nlohmann::json m;
    m["method"] = config.methods[k];
    m["mean_precision"] = mean_precision[k];
    m["sd_precision"] = sd_precision[k];
    m["mean_tpr"] = mean_tpr[k];
    m["sd_tpr"] = sd_tpr[k];
    j["aggregates"].push_back(m);
  }
  for (const auto& row : trials) {
    nlohmann::json r;
    r["trial"] = row.trial;
    r["seed"] = row.seed;
    r["ok"] = row.ok;
    if (!row.ok) r["error"] = row.error;
    r["structures_consistent"] = row.structures_consistent;
    for (size_t k = 0; k < row.metrics.size(); ++k) {
      nlohmann::json m;
      m["method"] = config.methods[k];
      m["tp"] = row.metrics[k].tp;
      m["fp"] = row.metrics[k].fp;
      m["fn"] = row.metrics[k].fn;
      m["tn"] = row.metrics[k].tn;
      m["precision"] = row.metrics[k].precision();
      m["tpr"] = row.metrics[k].tpr();
      m["seconds"] = row.seconds[k];
      r["methods"].push_back(m);
    }
    j["trials"].push_back(r);
  }
  return j;
}

std::string BenchmarkReport::to_csv() const {
  std::ostringstream os;
  os << "trial,seed,method,ok,tp,fp,fn,tn,precision,tpr,seconds\n";
  for (const auto& row : trials) {
    for (size_t k = 0; k < config.methods.size(); ++k) {
      os << row.trial << ',' << row.seed << ',' << config.methods[k] << ',' << (row.ok ? 1 : 0);
      if (row.ok && k < row.metrics.size()) {
        const auto& m = row.metrics[k];
        os << ',' << m.tp << ',' << m.fp << ',' << m.fn << ',' << m.tn << ','
           << m.precision() << ',' << m.tpr() << ',' << row.seconds[k];
      } else {
        os << ",,,,,,,";
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace dynet
