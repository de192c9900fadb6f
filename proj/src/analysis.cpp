#include "dodlab/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dodlab/error.hpp"
#include "dodlab/io.hpp"

namespace dodlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// With a single node both kinds describe the same first-order scheme.
QuadratureRule scheme_rule(NodeKind kind, int p) {
  if (kind == NodeKind::GaussLobattoLegendre && p == 0) {
    return make_rule(NodeKind::GaussLegendre, 0);
  }
  return make_rule(kind, p);
}

double wrap(double x, const Domain& d) {
  const double len = d.length();
  double r = std::fmod(x - d.left, len);
  if (r < 0.0) {
    r += len;
  }
  return d.left + r;
}

}  // namespace

int resolve_jobs(std::optional<int> requested) {
  if (requested) {
    if (*requested <= 0) {
      throw std::invalid_argument("--jobs must be positive");
    }
    return *requested;
  }
  if (const char* env = std::getenv("DODLAB_JOBS"); env != nullptr && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v <= 0) {
      throw std::invalid_argument("DODLAB_JOBS must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) {
    return;
  }
  const int workers = std::min(std::max(jobs, 1), n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mutex;
  auto worker = [&] {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!first) {
          first = std::current_exception();
        }
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back(worker);
  }
  for (auto& th : pool) {
    th.join();
  }
  if (first) {
    std::rethrow_exception(first);
  }
}

CutMesh GridSpec::mesh(double alpha) const {
  return make_mesh(domain, n_background, cut_cell, alpha);
}

CutMesh GridSpec::uniform_mesh() const {
  return make_uniform_mesh(domain, n_background);
}

GlobalOperator build_operator(const GridSpec& grid, NodeKind kind, int p,
                              std::optional<double> alpha,
                              const PenaltyConfig& penalty) {
  const QuadratureRule rule = scheme_rule(kind, p);
  const CutMesh mesh = alpha ? grid.mesh(*alpha) : grid.uniform_mesh();
  return assemble(mesh, rule, AdvectionConfig{grid.speed}, penalty);
}

void SweepSpec::validate() const {
  if (degrees.empty()) {
    throw std::invalid_argument("sweep needs at least one degree");
  }
  if (alphas.empty()) {
    throw std::invalid_argument("sweep needs at least one alpha");
  }
  if (lambdas.empty() && !include_optimized) {
    throw std::invalid_argument("sweep needs at least one lambda");
  }
  for (int p : degrees) {
    if (p < 0) {
      throw std::invalid_argument("polynomial degree must be nonnegative");
    }
  }
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 0.5)) {
      throw std::invalid_argument("alpha must lie in (0, 0.5]");
    }
  }
  for (double l : lambdas) {
    if (!(l > 0.0)) {
      throw std::invalid_argument("lambda must be positive");
    }
  }
}

std::vector<SweepRow> opnorm_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();

  struct Task {
    std::size_t row;  // npos for background tasks
    int p;
    double lambda_c;
    std::optional<double> alpha;
  };
  constexpr std::size_t kBackground = static_cast<std::size_t>(-1);

  std::vector<SweepRow> rows;
  std::vector<Task> tasks;
  std::map<int, std::size_t> background_task;
  for (int p : spec.degrees) {
    std::vector<double> lambdas = spec.lambdas;
    if (spec.include_optimized) {
      lambdas.push_back(spec.lambda_table.lookup(spec.kind, p));
    }
    if (!background_task.count(p)) {
      background_task[p] = tasks.size();
      tasks.push_back({kBackground, p, 0.0, std::nullopt});
    }
    for (double lam : lambdas) {
      for (double a : spec.alphas) {
        tasks.push_back({rows.size(), p, lam, a});
        rows.push_back({spec.kind, p, lam, a, kNaN, kNaN, kNaN, true, {}});
      }
    }
  }

  std::vector<double> values(tasks.size(), kNaN);
  std::vector<std::string> errors(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), jobs, [&](int i) {
    const Task& t = tasks[i];
    try {
      const GlobalOperator op = build_operator(
          spec.grid, spec.kind, t.p, t.alpha,
          PenaltyConfig{t.lambda_c, t.row != kBackground});
      values[i] = global_operator_norm(op, spec.norm);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    if (t.row == kBackground) {
      continue;
    }
    SweepRow& row = rows[t.row];
    const std::size_t bg = background_task.at(t.p);
    row.norm_dod = values[i];
    row.norm_background = values[bg];
    row.quotient = row.norm_dod / row.norm_background;
    if (!errors[i].empty() || !errors[bg].empty()) {
      row.ok = false;
      row.error = !errors[i].empty() ? errors[i] : "background: " + errors[bg];
    }
  }
  return rows;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) {
    throw std::invalid_argument("linspace needs at least one point");
  }
  if (n == 1) {
    return {lo};
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  out.back() = hi;
  return out;
}

std::pair<double, double> worst_case_norm(const GridSpec& grid, NodeKind kind,
                                          int p, double lambda_c,
                                          const std::vector<double>& alphas,
                                          const NormOptions& norm, int jobs) {
  if (alphas.empty()) {
    throw std::invalid_argument("alpha grid is empty");
  }
  std::vector<double> values(alphas.size());
  parallel_for(static_cast<int>(alphas.size()), jobs, [&](int i) {
    const GlobalOperator op = build_operator(grid, kind, p, alphas[i],
                                             PenaltyConfig{lambda_c, true});
    values[i] = global_operator_norm(op, norm);
  });
  const auto it = std::max_element(values.begin(), values.end());
  return {*it, alphas[it - values.begin()]};
}

OptimizerResult optimize_lambda(int p, NodeKind kind,
                                const OptimizerOptions& options, int jobs) {
  if (p < 0) {
    throw std::invalid_argument("polynomial degree must be nonnegative");
  }
  if (!(options.lambda_lo > 0.0 && options.lambda_lo < options.lambda_hi)) {
    throw std::invalid_argument("invalid lambda search interval");
  }
  if (options.lambda_grid < 2 || options.alpha_grid < 1) {
    throw std::invalid_argument("optimizer grids too small");
  }
  const std::vector<double> lambdas =
      linspace(options.lambda_lo, options.lambda_hi, options.lambda_grid);
  const std::vector<double> alphas =
      linspace(options.alpha_lo, options.alpha_hi, options.alpha_grid);

  OptimizerResult result{kind, p, kNaN, kNaN,
                         std::numeric_limits<double>::infinity(),
                         kNaN, options.lambda_grid, options.alpha_grid,
                         options.lambda_hi - options.lambda_lo, 0};

  auto objective = [&](double lam) {
    const auto [value, worst] =
        worst_case_norm(options.grid, kind, p, lam, alphas, options.norm, jobs);
    result.evaluations += static_cast<int>(alphas.size());
    if (value < result.minmax_norm) {
      result.minmax_norm = value;
      result.lambda_star = lam;
      result.worst_alpha = worst;
    }
    return value;
  };

  std::vector<double> coarse(lambdas.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    coarse[k] = objective(lambdas[k]);
  }
  result.coarse_minmax_norm = result.minmax_norm;
  const std::size_t best =
      std::min_element(coarse.begin(), coarse.end()) - coarse.begin();

  double a = lambdas[best == 0 ? 0 : best - 1];
  double b = lambdas[std::min(best + 1, lambdas.size() - 1)];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a >= options.tolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = objective(d);
    }
  }
  result.bracket_width = b - a;
  return result;
}

void LambdaTable::add(NodeKind kind, int p, double lambda_c) {
  entries_.emplace_back(kind, p, lambda_c);
}

LambdaTable LambdaTable::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open lambda table '" + path + "'");
  }
  const auto records = read_csv(in);
  if (records.empty()) {
    throw std::invalid_argument("lambda table '" + path + "' is empty");
  }
  const auto& header = records.front();
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::invalid_argument("lambda table lacks column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ck = column("kind");
  const std::size_t cp = column("p");
  const std::size_t cl = column("lambda_star");
  LambdaTable table;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() <= std::max({ck, cp, cl})) {
      throw std::invalid_argument("malformed row in lambda table");
    }
    try {
      table.add(parse_node_kind(rec[ck]), std::stoi(rec[cp]),
                std::stod(rec[cl]));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("malformed row in lambda table");
    }
  }
  return table;
}

double LambdaTable::lookup(NodeKind kind, int p) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (std::get<0>(*it) == kind && std::get<1>(*it) == p) {
      return std::get<2>(*it);
    }
  }
  if (const auto v = shipped_optimized_lambda(kind, p)) {
    return *v;
  }
  throw std::invalid_argument("no optimized lambda for " + to_string(kind) +
                              " p=" + std::to_string(p));
}

bool is_energy_stable(const RKMethod& method, const GlobalOperator& op,
                      double cfl, const CflSearchOptions& options) {
  const GridSpec& grid = options.grid;
  const double dt = cfl * grid.dx() / grid.speed;
  const double horizon = options.periods * grid.domain.length() / grid.speed;

  StateVector u0;
  if (options.initial == InitialCondition::kSine) {
    const Domain dom = grid.domain;
    u0 = project_initial_condition(op.mesh(), op.rule(), [dom](double x) {
      return std::sin(2.0 * std::numbers::pi * (x - dom.left) / dom.length());
    });
  } else {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    u0.resize(op.size());
    for (Eigen::Index i = 0; i < u0.size(); ++i) {
      u0(i) = normal(rng);
    }
  }
  EvolveOptions evolve_options;
  evolve_options.record_every = std::numeric_limits<int>::max();
  if (options.criterion == StabilityCriterion::kMonotoneEnergy) {
    evolve_options.abort_above_ratio = 1.0 + options.energy_tol;
  }
  return evolve(method, op, u0, dt, horizon, evolve_options).stable();
}

CflResult sharp_cfl_search(const RKMethod& method, int p, NodeKind kind,
                           std::optional<double> alpha,
                           const PenaltyConfig& penalty,
                           const std::string& lambda_mode,
                           const CflSearchOptions& options) {
  if (!(options.rel_tol > 0.0) || !(options.periods > 0.0)) {
    throw std::invalid_argument("CFL search needs positive tolerance and horizon");
  }
  const GlobalOperator op =
      build_operator(options.grid, kind, p, alpha, penalty);
  int evaluations = 0;
  auto stable = [&](double cfl) {
    ++evaluations;
    return is_energy_stable(method, op, cfl, options);
  };

  double lo = 0.0;
  double hi = 0.0;
  constexpr int kMaxExpansions = 60;
  if (options.bracket) {
    lo = options.bracket->first;
    hi = options.bracket->second;
    if (!(lo > 0.0 && lo < hi)) {
      throw std::invalid_argument("CFL bracket must satisfy 0 < lo < hi");
    }
    const bool lo_ok = stable(lo);
    const bool hi_ok = stable(hi);
    if (!lo_ok || hi_ok) {
      std::ostringstream msg;
      msg << "invalid CFL bracket [" << lo << ", " << hi << "]: lo is "
          << (lo_ok ? "stable" : "unstable") << ", hi is "
          << (hi_ok ? "stable" : "unstable");
      throw BracketError(msg.str(), lo, hi, lo_ok, hi_ok);
    }
  } else {
    const double scaled_norm = global_operator_norm(op, options.norm) *
                               options.grid.dx() / options.grid.speed;
    const double start = method.monotonicity_cfl.value_or(1.0) / scaled_norm;
    if (stable(start)) {
      lo = start;
      hi = 2.0 * start;
      int n = 0;
      while (stable(hi)) {
        if (++n > kMaxExpansions) {
          throw BracketError("no unstable Courant number found", lo, hi, true,
                             true);
        }
        lo = hi;
        hi *= 2.0;
      }
    } else {
      hi = start;
      lo = 0.5 * start;
      int n = 0;
      while (!stable(lo)) {
        if (++n > kMaxExpansions) {
          throw BracketError("no stable Courant number found", lo, hi, false,
                             false);
        }
        hi = lo;
        lo *= 0.5;
      }
    }
  }

  while (hi / lo - 1.0 > options.rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (stable(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return CflResult{method.name, p, kind, alpha, lambda_mode,
                   penalty.lambda_c, lo, hi, hi - lo, evaluations};
}

ScalingFit scaling_fit(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("scaling fit needs equally many xs and ys");
  }
  if (xs.size() < 3) {
    throw std::invalid_argument("scaling fit needs at least three points");
  }
  const std::size_t n = xs.size();
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw std::invalid_argument("scaling fit needs positive data");
    }
    a(i, 0) = std::log(xs[i]);
    a(i, 1) = 1.0;
    b(i) = std::log(ys[i]);
  }
  if (a.col(0).maxCoeff() == a.col(0).minCoeff()) {
    throw std::invalid_argument("scaling fit needs distinct xs");
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  const double rms = std::sqrt((a * coef - b).squaredNorm() / n);
  return ScalingFit{coef(0), std::exp(coef(1)), rms};
}

RunResult run_advection(const RunSpec& spec,
                        const std::function<double(double)>& u0) {
  if (!(spec.cfl > 0.0)) {
    throw std::invalid_argument("Courant number must be positive");
  }
  const QuadratureRule rule = scheme_rule(spec.kind, spec.p);
  const CutMesh mesh =
      spec.alpha ? make_mesh(spec.domain, spec.n_background,
                             std::max(2, spec.n_background / 2), *spec.alpha)
                 : make_uniform_mesh(spec.domain, spec.n_background);
  const GlobalOperator op =
      assemble(mesh, rule, AdvectionConfig{spec.speed}, spec.penalty);
  const StateVector start = project_initial_condition(mesh, rule, u0);
  const double dt = spec.cfl * mesh.background_dx() / spec.speed;

  EvolveOptions evolve_options;
  evolve_options.record_every = std::numeric_limits<int>::max();
  const Trajectory traj =
      evolve(spec.method, op, start, dt, spec.final_time, evolve_options);

  const Domain dom = spec.domain;
  const double shift = spec.speed * spec.final_time;
  const StateVector exact = project_initial_condition(
      mesh, rule, [&](double x) { return u0(wrap(x - shift, dom)); });
  const double error =
      std::sqrt((traj.final_state - exact).cwiseAbs2().dot(op.mass()));
  return RunResult{spec.n_background, spec.alpha, dt, traj.steps, error,
                   traj.stable()};
}

double fitted_order(const std::vector<int>& resolutions,
                    const std::vector<double>& errors) {
  std::vector<double> xs(resolutions.begin(), resolutions.end());
  return -scaling_fit(xs, errors).exponent;
}

}  // namespace dodlab
