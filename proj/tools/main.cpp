//! Command-line front end: generate instances, solve them with any of the
//! three algorithms, benchmark algorithm grids, and run the index-tracking
//! backtest.  Every command writes machine-readable output (JSON or CSV) that
//! embeds a run manifest: the exact command line, the full configuration,
//! the library version, and start/finish timestamps.  All numeric output is
//! deterministic for fixed inputs; timestamps and timings are the only fields
//! that vary between identical runs.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "exlasso/exlasso.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";
constexpr int kExitRuntimeError = 1;
constexpr int kExitNotConverged = 3;

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

//! Reports must not leak NaN or infinity.
double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite value in report: ") + what);
  return v;
}

json make_manifest(const std::string& command, json config, const std::string& started,
                   const std::vector<std::string>& outputs) {
  return json{{"command", command},      {"config", std::move(config)},
              {"version", kVersion},     {"started_at", started},
              {"finished_at", iso_timestamp()}, {"outputs", outputs}};
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string status_name(exlasso::SolveStatus s) {
  switch (s) {
    case exlasso::SolveStatus::converged: return "converged";
    case exlasso::SolveStatus::iteration_limit: return "iteration_limit";
    case exlasso::SolveStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

exlasso::Index support_size(const exlasso::Vector& x, double thresh = 1e-8) {
  exlasso::Index s = 0;
  for (exlasso::Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > thresh) ++s;
  return s;
}

struct SolveOutcome {
  exlasso::SolveStatus status = exlasso::SolveStatus::iteration_limit;
  double eta_kkt = 0.0;
  double objective = 0.0;
  double seconds = 0.0;
  long outer_iterations = 0;  // 0 for the single-loop baselines
  long inner_iterations = 0;  // total inner (or only) iterations
  std::string iterations_label;
  exlasso::Index support = 0;
};

SolveOutcome run_algorithm(const std::string& algo, const exlasso::ProblemSpec& spec, double tol,
                           long max_iter, double time_cap,
                           const std::optional<std::string>& precond) {
  SolveOutcome out;
  if (algo == "ppdna") {
    exlasso::PpdnaConfig cfg;
    cfg.kkt_tol = tol;
    cfg.max_outer = static_cast<int>(max_iter);
    cfg.max_seconds = time_cap;
    if (precond) {
      cfg.preconditioner = *precond == "ata" ? exlasso::Preconditioner::ata
                                             : exlasso::Preconditioner::identity;
    }
    const exlasso::PpdnaReport rep = exlasso::ppdna_solve(spec, cfg);
    out.status = rep.status;
    out.eta_kkt = rep.eta_kkt;
    out.objective = rep.objective;
    out.seconds = rep.seconds;
    out.outer_iterations = rep.outer_iterations;
    out.inner_iterations = rep.inner_iterations;
    out.iterations_label =
        std::to_string(rep.outer_iterations) + "(" + std::to_string(rep.inner_iterations) + ")";
    out.support = support_size(rep.x);
  } else if (algo == "admm") {
    exlasso::AdmmConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.max_seconds = time_cap;
    const exlasso::AdmmReport rep = exlasso::admm_solve(spec, cfg);
    out.status = rep.status;
    out.eta_kkt = rep.eta_kkt;
    out.objective = rep.objective;
    out.seconds = rep.seconds;
    out.inner_iterations = rep.iterations;
    out.iterations_label = std::to_string(rep.iterations);
    out.support = support_size(rep.x);
  } else if (algo == "apg") {
    exlasso::ApgConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.max_seconds = time_cap;
    const exlasso::ApgReport rep = exlasso::apg_solve(spec, cfg);
    out.status = rep.status;
    out.eta_kkt = rep.eta_kkt;
    out.objective = rep.objective;
    out.seconds = rep.seconds;
    out.inner_iterations = rep.iterations;
    out.iterations_label = std::to_string(rep.iterations);
    out.support = support_size(rep.x);
  } else {
    throw std::runtime_error("unknown algorithm: " + algo);
  }
  finite(out.eta_kkt, "eta_kkt");
  finite(out.objective, "objective");
  return out;
}

// -------------------------------------------------------------- gen --------

struct GenFlags {
  std::uint64_t m = 0, s = 0, p = 0, nnz = 0, seed = 0;  // nnz 0: min(10, p)
  std::string task = "regression";
  std::string out;
};

int cmd_gen(const GenFlags& f, const std::string& command) {
  const std::string started = iso_timestamp();
  const std::uint64_t nnz = f.nnz > 0 ? f.nnz : std::min<std::uint64_t>(10, f.p);
  exlasso::SynthConfig cfg;
  cfg.m = static_cast<exlasso::Index>(f.m);
  cfg.n_groups = static_cast<exlasso::Index>(f.s);
  cfg.group_size = static_cast<exlasso::Index>(f.p);
  cfg.nnz_per_group = static_cast<exlasso::Index>(nnz);
  cfg.task = f.task == "classification" ? exlasso::LossKind::logistic
                                        : exlasso::LossKind::least_squares;
  cfg.seed = f.seed;

  const json config{{"m", f.m},     {"s", f.s},       {"p", f.p},
                    {"nnz", nnz},   {"task", f.task}, {"seed", f.seed},
                    {"out", f.out}};

  const exlasso::SynthInstance inst = exlasso::synth_generate(cfg);
  exlasso::InstanceFile file;
  file.task = inst.task;
  file.A = inst.A;
  file.b = inst.b;
  file.weights = inst.part.weights();
  file.groups = inst.part.groups();
  file.x_star = inst.x_star;
  file.config_echo = config.dump();
  exlasso::save_instance(f.out, file);

  const json manifest = make_manifest(command, config, started, {f.out, f.out + ".json"});
  write_text(f.out + ".json", json{{"manifest", manifest}}.dump(2) + "\n");
  std::cout << "wrote " << f.out << " (" << f.m << " x " << f.s * f.p << ")\n";
  return 0;
}

// ------------------------------------------------------------ solve --------

struct SolveFlags {
  std::string instance;
  std::string algo = "ppdna";
  double lambda = 1e-3;
  double tol = 1e-6;
  long max_iter = 0;  // 0: per-algorithm default
  double time_cap = 3600.0;
  std::optional<std::string> precond;
  std::string out;
};

json solve_to_json(const SolveFlags& f, const std::string& command) {
  const std::string started = iso_timestamp();
  const exlasso::InstanceFile file = exlasso::load_instance(f.instance);
  const exlasso::ProblemSpec spec = exlasso::instance_problem(file, f.lambda);
  const long max_iter = f.max_iter > 0 ? f.max_iter : (f.algo == "ppdna" ? 200 : 200000);

  const SolveOutcome out = run_algorithm(f.algo, spec, f.tol, max_iter, f.time_cap, f.precond);

  json config{{"instance", f.instance}, {"algo", f.algo},   {"lambda", f.lambda},
              {"tol", f.tol},           {"max_iter", max_iter}, {"time_cap", f.time_cap}};
  if (f.precond) config["precond"] = *f.precond;

  return json{
      {"algorithm", f.algo},
      {"lambda", f.lambda},
      {"tol", f.tol},
      {"result",
       {{"status", status_name(out.status)},
        {"converged", out.status == exlasso::SolveStatus::converged},
        {"eta_kkt", out.eta_kkt},
        {"objective", out.objective},
        {"iterations", out.iterations_label},
        {"outer_iterations", out.outer_iterations},
        {"inner_iterations", out.inner_iterations},
        {"support_size", out.support}}},
      {"timing", {{"seconds", out.seconds}}},
      {"manifest", make_manifest(command, std::move(config), started,
                                 f.out.empty() ? std::vector<std::string>{}
                                               : std::vector<std::string>{f.out})}};
}

int cmd_solve(const SolveFlags& f, const std::string& command) {
  const json rep = solve_to_json(f, command);
  const std::string text = rep.dump(2) + "\n";
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_text(f.out, text);
    std::cout << "wrote " << f.out << "\n";
  }
  return rep["result"]["converged"].get<bool>() ? 0 : kExitNotConverged;
}

// ------------------------------------------------------------ bench --------

struct BenchFlags {
  std::vector<std::string> instances;
  std::vector<std::string> algos;
  std::vector<double> lambdas;
  double tol = 1e-6;
  long max_iter = 0;
  double time_cap = 3600.0;
  std::string out;
};

int cmd_bench(const BenchFlags& f, const std::string& command) {
  const std::string started = iso_timestamp();
  std::ostringstream csv;
  csv << "instance,m,n,groups,task,lambda,algo,iterations,inner_iterations,eta_kkt,"
         "time_seconds,converged,failed\n";

  std::vector<std::string> instances = f.instances;
  std::vector<std::string> algos = f.algos;
  std::vector<double> lambdas = f.lambdas;
  std::sort(instances.begin(), instances.end());
  std::sort(algos.begin(), algos.end());
  std::sort(lambdas.begin(), lambdas.end());

  for (const std::string& path : instances) {
    const exlasso::InstanceFile file = exlasso::load_instance(path);
    for (const double lambda : lambdas) {
      const exlasso::ProblemSpec spec = exlasso::instance_problem(file, lambda);
      for (const std::string& algo : algos) {
        const long max_iter = f.max_iter > 0 ? f.max_iter : (algo == "ppdna" ? 200 : 200000);
        const SolveOutcome out =
            run_algorithm(algo, spec, f.tol, max_iter, f.time_cap, std::nullopt);
        const bool converged = out.status == exlasso::SolveStatus::converged;
        csv << path << ',' << file.A.rows() << ',' << file.A.cols() << ',' << file.groups.size()
            << ',' << (file.task == exlasso::LossKind::logistic ? "classification" : "regression")
            << ',' << lambda << ',' << algo << ',' << out.iterations_label << ','
            << out.inner_iterations << ',' << out.eta_kkt << ',' << out.seconds << ','
            << (converged ? "true" : "false") << ',' << (converged ? "false" : "true") << '\n';
      }
    }
  }

  write_text(f.out, csv.str());
  const json config{{"instances", instances}, {"algos", algos},       {"lambdas", lambdas},
                    {"tol", f.tol},           {"max_iter", f.max_iter}, {"time_cap", f.time_cap}};
  write_text(f.out + ".json",
             json{{"manifest", make_manifest(command, config, started, {f.out})}}.dump(2) + "\n");
  std::cout << "wrote " << f.out << "\n";
  return 0;
}

// --------------------------------------------------------- backtest --------

struct BacktestFlags {
  std::string prices, index, sectors;
  long window = 90, holding = 10;
  int folds = 9;
  double rc = 0.0;
  std::vector<double> lambdas;
  std::string out;
  std::string returns_csv;
};

int cmd_backtest(const BacktestFlags& f, const std::string& command) {
  const std::string started = iso_timestamp();
  const exlasso::ReturnPanel panel =
      exlasso::ingest_prices(f.prices, f.index, f.sectors, f.rc);
  exlasso::BacktestConfig cfg;
  cfg.window = f.window;
  cfg.holding = f.holding;
  cfg.folds = f.folds;
  cfg.lambda_grid = f.lambdas;
  const exlasso::BacktestReport rep = exlasso::run_backtest(panel, cfg);

  json windows = json::array();
  for (const auto& w : rep.windows) {
    json counts = json::object();
    for (std::size_t g = 0; g < rep.sector_names.size(); ++g)
      counts[rep.sector_names[g]] = w.sector_counts[g];
    windows.push_back({{"date", w.rebalance_date},
                       {"lambda", finite(w.lambda, "lambda")},
                       {"support_size", w.support_size},
                       {"sector_counts", counts},
                       {"in_sample_rmse", finite(w.in_sample_rmse, "in_sample_rmse")},
                       {"out_sample_rmse", finite(w.out_sample_rmse, "out_sample_rmse")}});
  }
  json sector_percent = json::object();
  for (std::size_t g = 0; g < rep.sector_names.size(); ++g)
    sector_percent[rep.sector_names[g]] = rep.sector_percent[g];

  const json config{{"prices", f.prices},   {"index", f.index},     {"sectors", f.sectors},
                    {"window", f.window},   {"holding", f.holding}, {"folds", f.folds},
                    {"rc", f.rc},           {"lambdas", f.lambdas}};
  std::vector<std::string> outputs{f.out};
  if (!f.returns_csv.empty()) outputs.push_back(f.returns_csv);

  const json doc{{"windows", windows},
                 {"sector_percent", sector_percent},
                 {"out_sample_rmse", finite(rep.out_sample_rmse, "out_sample_rmse")},
                 {"days", rep.daily_dates.size()},
                 {"manifest", make_manifest(command, config, started, outputs)}};
  write_text(f.out, doc.dump(2) + "\n");

  if (!f.returns_csv.empty()) {
    std::ostringstream csv;
    csv << "date,portfolio_return,index_return\n";
    csv.precision(17);
    for (std::size_t t = 0; t < rep.daily_dates.size(); ++t)
      csv << rep.daily_dates[t] << ',' << rep.portfolio_returns[t] << ','
          << rep.index_returns[t] << '\n';
    write_text(f.returns_csv, csv.str());
  }
  std::cout << "wrote " << f.out << " (" << rep.windows.size() << " windows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exclusive-lasso solver toolkit"};
  app.require_subcommand(1);
  const std::string command = join_args(argc, argv);

  GenFlags gen;
  CLI::App* g = app.add_subcommand("gen", "generate a synthetic instance");
  g->add_option("--m", gen.m, "rows (samples)")->required()->check(CLI::PositiveNumber);
  g->add_option("--s", gen.s, "number of groups")->required()->check(CLI::PositiveNumber);
  g->add_option("--p", gen.p, "group size")->required()->check(CLI::PositiveNumber);
  g->add_option("--nnz", gen.nnz, "nonzeros per group (default: min(10, p))")
      ->check(CLI::PositiveNumber);
  g->add_option("--task", gen.task, "regression | classification")
      ->check(CLI::IsMember({"regression", "classification"}));
  g->add_option("--seed", gen.seed, "generator seed");
  g->add_option("--out", gen.out, "instance file path")->required();

  SolveFlags solve;
  CLI::App* s = app.add_subcommand("solve", "solve an instance");
  s->add_option("--instance", solve.instance, "instance file")->required();
  s->add_option("--algo", solve.algo, "ppdna | admm | apg")
      ->check(CLI::IsMember({"ppdna", "admm", "apg"}));
  s->add_option("--lambda", solve.lambda, "regularization level")->required();
  s->add_option("--tol", solve.tol, "KKT tolerance");
  s->add_option("--max-iter", solve.max_iter, "iteration cap (0: per-algorithm default)");
  s->add_option("--time-cap", solve.time_cap, "wall-clock cap in seconds");
  std::string precond_flag;
  s->add_option("--precond", precond_flag, "identity | ata (ppdna only)")
      ->check(CLI::IsMember({"identity", "ata"}));
  s->add_option("--out", solve.out, "report path (default: stdout)");

  BenchFlags bench;
  CLI::App* bn = app.add_subcommand("bench", "compare algorithms over a grid");
  bn->add_option("--instance", bench.instances, "instance file (repeatable)")->required();
  bn->add_option("--algo", bench.algos, "algorithm (repeatable)")
      ->required()
      ->check(CLI::IsMember({"ppdna", "admm", "apg"}));
  bn->add_option("--lambda", bench.lambdas, "lambda (repeatable)")->required();
  bn->add_option("--tol", bench.tol, "KKT tolerance");
  bn->add_option("--max-iter", bench.max_iter, "iteration cap (0: per-algorithm default)");
  bn->add_option("--time-cap", bench.time_cap, "wall-clock cap in seconds");
  bn->add_option("--out", bench.out, "CSV path")->required();

  BacktestFlags bt;
  CLI::App* b = app.add_subcommand("backtest", "rolling-window index tracking");
  b->add_option("--prices", bt.prices, "price CSV (date,ticker,close)")->required();
  b->add_option("--index", bt.index, "index CSV (date,close)")->required();
  b->add_option("--sectors", bt.sectors, "sector CSV (ticker,sector)")->required();
  b->add_option("--window", bt.window, "fit window in return days");
  b->add_option("--holding", bt.holding, "holding block in return days");
  b->add_option("--folds", bt.folds, "cross-validation folds");
  b->add_option("--rc", bt.rc, "risk-free daily rate subtracted from returns");
  b->add_option("--lambda", bt.lambdas, "fixed lambda grid (repeatable; default: scaled grid)");
  b->add_option("--out", bt.out, "report JSON path")->required();
  b->add_option("--returns-csv", bt.returns_csv, "flat daily returns CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*g) return cmd_gen(gen, command);
    if (*s) {
      if (!precond_flag.empty()) solve.precond = precond_flag;
      return cmd_solve(solve, command);
    }
    if (*bn) return cmd_bench(bench, command);
    if (*b) return cmd_backtest(bt, command);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitRuntimeError;  // unreachable with require_subcommand(1)
}
