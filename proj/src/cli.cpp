#include "dodlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dodlab/analysis.hpp"
#include "dodlab/error.hpp"
#include "dodlab/global_operator.hpp"
#include "dodlab/io.hpp"
#include "dodlab/timestepping.hpp"

#ifndef DODLAB_VERSION
#define DODLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace dodlab {

const char* version() { return DODLAB_VERSION; }

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) {
    out.push_back(item);
  }
  if (!text.empty() && text.back() == sep) {
    out.emplace_back();
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  if (pos != t.size() || !std::isfinite(v)) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

// Trims float noise from range arithmetic (0.1 + 2 * 0.1 -> 0.3).
double tidy(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return std::stod(os.str());
}

json flags_of(const CLI::App& app) {
  json flags = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name == "--help" || name == "-h") {
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) {
        value += (i ? "," : "") + results[i];
      }
      if (results.empty()) {
        value = "true";
      }
    } else {
      value = opt->get_default_str();
    }
    flags[opt->get_name()] = value;
  }
  return flags;
}

struct Common {
  std::string out = ".";
  std::optional<int> jobs;
  std::uint64_t seed = 20240521;
  std::optional<double> dx;
  std::optional<int> n_background;
  std::optional<int> cut_cell;
  double speed = 1.0;
  std::string lambda_table;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--jobs", c.jobs,
                  "Worker threads (default: DODLAB_JOBS, else all cores)");
  sub->add_option("--seed", c.seed, "Seed for randomized norm estimates")
      ->capture_default_str();
  sub->add_option("--speed", c.speed, "Advection speed a > 0")
      ->capture_default_str();
  sub->add_option("--lambda-table", c.lambda_table,
                  "CSV (kind,p,lambda_star) overriding the shipped table");
}

void add_grid(CLI::App* sub, Common& c) {
  sub->add_option("--dx", c.dx, "Background cell size (default 1/50)");
  sub->add_option("--n-background", c.n_background,
                  "Number of background cells (alternative to --dx)");
  sub->add_option("--cut-cell", c.cut_cell,
                  "1-based index of the small cut cell (default n/2)");
}

GridSpec make_grid(const Common& c) {
  if (c.dx && c.n_background) {
    throw UsageError("--dx and --n-background are mutually exclusive");
  }
  if (!(c.speed > 0.0)) {
    throw UsageError("--speed must be positive");
  }
  GridSpec grid;
  grid.speed = c.speed;
  if (c.dx) {
    if (!(*c.dx > 0.0)) {
      throw UsageError("--dx must be positive");
    }
    const double n = grid.domain.length() / *c.dx;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * n) {
      throw UsageError("--dx must divide the unit domain evenly");
    }
    grid.n_background = static_cast<int>(rounded);
  } else if (c.n_background) {
    grid.n_background = *c.n_background;
  }
  if (grid.n_background < 4) {
    throw UsageError("need at least 4 background cells");
  }
  grid.cut_cell = c.cut_cell.value_or(grid.n_background / 2);
  if (grid.cut_cell < 2 || grid.cut_cell > grid.n_background - 1) {
    throw UsageError("--cut-cell must lie in [2, n_background - 1]");
  }
  return grid;
}

LambdaTable make_lambda_table(const Common& c) {
  if (c.lambda_table.empty()) {
    return {};
  }
  return as_usage([&] { return LambdaTable::from_csv(c.lambda_table); });
}

std::vector<NodeKind> parse_kinds(const std::string& text) {
  std::vector<NodeKind> out;
  for (const auto& item : split(text, ',')) {
    out.push_back(as_usage([&] { return parse_node_kind(trim(item)); }));
  }
  if (out.empty()) {
    throw UsageError("empty node kind list");
  }
  return out;
}

struct LambdaChoice {
  std::string mode;  // "optimized", "off", or the numeric value
  bool optimized = false;
  bool enabled = true;
  double value = 1.0;
};

std::vector<LambdaChoice> parse_lambdas(const std::string& text) {
  std::vector<LambdaChoice> out;
  for (const auto& raw : split(text, ',')) {
    const std::string item = trim(raw);
    if (item == "optimized" || item == "opt") {
      out.push_back({"optimized", true, true, 0.0});
    } else if (item == "off" || item == "none") {
      out.push_back({"off", false, false, 1.0});
    } else {
      for (double v : as_usage([&] { return parse_real_list(item); })) {
        if (!(v > 0.0)) {
          throw UsageError("lambda must be positive");
        }
        out.push_back({format_number(v), false, true, v});
      }
    }
  }
  if (out.empty()) {
    throw UsageError("empty lambda list");
  }
  return out;
}

PenaltyConfig resolve(const LambdaChoice& choice, const LambdaTable& table,
                      NodeKind kind, int p) {
  if (choice.optimized) {
    return {as_usage([&] { return table.lookup(kind, p); }), true};
  }
  return {choice.value, choice.enabled};
}

std::vector<int> degrees_from(const std::string& text) {
  auto ps = as_usage([&] { return parse_int_list(text); });
  if (ps.empty()) {
    throw UsageError("empty degree list");
  }
  for (int p : ps) {
    if (p < 0 || p > kDefaultMaxDegree) {
      throw UsageError("degree out of range");
    }
  }
  return ps;
}

std::vector<double> alphas_from(const std::string& text) {
  auto as = as_usage([&] { return parse_real_list(text); });
  if (as.empty()) {
    throw UsageError("empty alpha list");
  }
  for (double a : as) {
    if (!(a > 0.0 && a <= 0.5)) {
      throw UsageError("alpha must lie in (0, 0.5]");
    }
  }
  return as;
}

InitialCondition parse_initial(const std::string& text) {
  if (text == "sine") {
    return InitialCondition::kSine;
  }
  if (text == "random") {
    return InitialCondition::kRandom;
  }
  throw UsageError("unknown initial condition '" + text + "'");
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return os;
}

std::string alpha_field(const std::optional<double>& alpha) {
  return alpha ? format_number(*alpha) : "";
}

struct Context {
  Common common;
  fs::path out;
  int jobs = 1;
  std::vector<std::string> outputs;

  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return out / name;
  }
};

// ------------------------------------------------------------ opnorm-sweep

struct SweepArgs {
  std::string kind = "gll";
  std::string p = "1";
  std::string alphas = "0.01:0.01:0.5";
  std::string lambda = "1.0";
  std::string dump_operator;
};

int cmd_opnorm_sweep(Context& ctx, const SweepArgs& args) {
  SweepSpec spec;
  const auto kinds = parse_kinds(args.kind);
  if (kinds.size() != 1) {
    throw UsageError("opnorm-sweep takes a single --kind");
  }
  spec.kind = kinds.front();
  spec.degrees = degrees_from(args.p);
  spec.alphas = alphas_from(args.alphas);
  for (const auto& choice : parse_lambdas(args.lambda)) {
    if (!choice.enabled) {
      throw UsageError("opnorm-sweep reports the unstabilized norm as "
                       "norm_background; use numeric lambdas or 'optimized'");
    }
    if (choice.optimized) {
      spec.include_optimized = true;
    } else {
      spec.lambdas.push_back(choice.value);
    }
  }
  spec.lambda_table = make_lambda_table(ctx.common);
  spec.grid = make_grid(ctx.common);
  spec.norm.seed = ctx.common.seed;
  if (spec.include_optimized) {
    for (int p : spec.degrees) {
      as_usage([&] { return spec.lambda_table.lookup(spec.kind, p); });
    }
  }

  if (!args.dump_operator.empty()) {
    const double lam = spec.lambdas.empty()
                           ? spec.lambda_table.lookup(spec.kind, spec.degrees[0])
                           : spec.lambdas[0];
    const GlobalOperator op = build_operator(
        spec.grid, spec.kind, spec.degrees[0], spec.alphas[0], {lam, true});
    auto os = open_output(args.dump_operator);
    op.write_triplets(os);
  }

  const auto rows = opnorm_sweep(spec, ctx.jobs);
  auto os = open_output(ctx.output("opnorm_sweep.csv"));
  CsvWriter csv(os, {"kind", "p", "lambda_c", "alpha", "norm_dod",
                     "norm_background", "quotient", "status"});
  int failed = 0;
  for (const auto& r : rows) {
    csv.row({to_string(r.kind), std::to_string(r.p), format_number(r.lambda_c),
             format_number(r.alpha), format_number(r.norm_dod),
             format_number(r.norm_background), format_number(r.quotient),
             r.ok ? "ok" : r.error});
    if (!r.ok) {
      ++failed;
      std::cerr << "point p=" << r.p << " lambda=" << r.lambda_c
                << " alpha=" << r.alpha << " failed: " << r.error << '\n';
    }
  }
  return failed ? kExitFailure : kExitSuccess;
}

// --------------------------------------------------------- optimize-lambda

struct OptimizeArgs {
  std::string kind = "gl,gll";
  std::string p = "0:1:5";
  int lambda_grid = 51;
  int alpha_grid = 51;
  double tol = 1e-4;
  std::string lambda_range = "0.001:1";
  std::string alpha_range = "0.01:0.5";
};

std::pair<double, double> parse_interval(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) {
    throw UsageError("expected an interval lo:hi, got '" + text + "'");
  }
  const double lo = as_usage([&] { return parse_double(parts[0]); });
  const double hi = as_usage([&] { return parse_double(parts[1]); });
  if (!(lo < hi)) {
    throw UsageError("interval must satisfy lo < hi");
  }
  return {lo, hi};
}

int cmd_optimize(Context& ctx, const OptimizeArgs& args) {
  const auto kinds = parse_kinds(args.kind);
  const auto degrees = degrees_from(args.p);
  OptimizerOptions opt;
  opt.lambda_grid = args.lambda_grid;
  opt.alpha_grid = args.alpha_grid;
  opt.tolerance = args.tol;
  std::tie(opt.lambda_lo, opt.lambda_hi) = parse_interval(args.lambda_range);
  std::tie(opt.alpha_lo, opt.alpha_hi) = parse_interval(args.alpha_range);
  if (opt.lambda_grid < 2 || opt.alpha_grid < 1 || !(opt.tolerance > 0.0)) {
    throw UsageError("grids need >= 2 lambda and >= 1 alpha points, tol > 0");
  }
  if (!(opt.lambda_lo > 0.0) || !(opt.alpha_lo > 0.0) || opt.alpha_hi > 0.5) {
    throw UsageError("search intervals must be positive, alpha <= 0.5");
  }
  opt.grid = make_grid(ctx.common);
  opt.norm.seed = ctx.common.seed;

  std::vector<OptimizerResult> results;
  for (NodeKind kind : kinds) {
    for (int p : degrees) {
      const auto t0 = std::chrono::steady_clock::now();
      results.push_back(optimize_lambda(p, kind, opt, ctx.jobs));
      const auto& r = results.back();
      std::cerr << to_string(kind) << " p=" << p
                << " lambda*=" << format_number(r.lambda_star)
                << " worst alpha=" << format_number(r.worst_alpha) << " ("
                << std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count()
                << " s)\n";
    }
  }
  auto os = open_output(ctx.output("lambda_opt.csv"));
  CsvWriter csv(os, {"kind", "p", "lambda_star", "worst_alpha", "minmax_norm"});
  for (const auto& r : results) {
    csv.row({to_string(r.kind), std::to_string(r.p),
             format_number(r.lambda_star), format_number(r.worst_alpha),
             format_number(r.minmax_norm)});
  }
  return kExitSuccess;
}

// -------------------------------------------------------------- cfl-search

struct CflArgs {
  std::string method = "euler";
  std::string kind = "gl";
  std::string p = "0";
  std::string alphas = "0.001,0.1,0.49";
  std::string lambda = "1.0";
  bool uncut = false;
  double periods = 100.0;
  std::string bracket;
  double rel_tol = 1e-3;
  std::string initial = "sine";
  std::string criterion = "bounded";
  std::string dump_operator;
};

struct CflTask {
  NodeKind kind;
  int p;
  std::optional<double> alpha;
  std::string mode;
  PenaltyConfig penalty;
};

int cmd_cfl_search(Context& ctx, const CflArgs& args) {
  const RKMethod method = as_usage([&] { return method_by_name(args.method); });
  const auto kinds = parse_kinds(args.kind);
  const auto degrees = degrees_from(args.p);
  const auto alphas = alphas_from(args.alphas);
  const auto lambdas = parse_lambdas(args.lambda);
  const LambdaTable table = make_lambda_table(ctx.common);
  CflSearchOptions opt;
  opt.grid = make_grid(ctx.common);
  opt.periods = args.periods;
  opt.rel_tol = args.rel_tol;
  opt.initial = parse_initial(args.initial);
  if (args.criterion == "bounded") {
    opt.criterion = StabilityCriterion::kBounded;
  } else if (args.criterion == "monotone") {
    opt.criterion = StabilityCriterion::kMonotoneEnergy;
  } else {
    throw UsageError("unknown stability criterion '" + args.criterion + "'");
  }
  opt.seed = ctx.common.seed;
  opt.norm.seed = ctx.common.seed;
  if (!(opt.periods > 0.0) || !(opt.rel_tol > 0.0)) {
    throw UsageError("--periods and --rel-tol must be positive");
  }
  if (!args.bracket.empty()) {
    const auto b = parse_interval(args.bracket);
    if (!(b.first > 0.0)) {
      throw UsageError("--bracket must be positive");
    }
    opt.bracket = b;
  }

  std::vector<CflTask> tasks;
  for (NodeKind kind : kinds) {
    for (int p : degrees) {
      if (args.uncut) {
        tasks.push_back({kind, p, std::nullopt, "background", {1.0, false}});
      }
      for (const auto& choice : lambdas) {
        const PenaltyConfig penalty = resolve(choice, table, kind, p);
        for (double a : alphas) {
          tasks.push_back({kind, p, a, choice.mode, penalty});
        }
      }
    }
  }

  if (!args.dump_operator.empty()) {
    const auto& t = tasks.front();
    const GlobalOperator op =
        build_operator(opt.grid, t.kind, t.p, t.alpha, t.penalty);
    auto os = open_output(args.dump_operator);
    op.write_triplets(os);
  }

  std::vector<std::optional<CflResult>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), ctx.jobs, [&](int i) {
    const auto& t = tasks[i];
    try {
      results[i] = sharp_cfl_search(method, t.p, t.kind, t.alpha, t.penalty,
                                    t.mode, opt);
    } catch (const BracketError& e) {
      std::ostringstream msg;
      msg << e.what() << " (measured: lo=" << e.lo() << " "
          << (e.lo_stable() ? "stable" : "unstable") << ", hi=" << e.hi()
          << " " << (e.hi_stable() ? "stable" : "unstable") << ")";
      errors[i] = msg.str();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  auto os = open_output(ctx.output("cfl.csv"));
  CsvWriter csv(os, {"method", "kind", "p", "alpha", "lambda_mode",
                     "sharp_cfl", "unstable_cfl"});
  int failed = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    if (!results[i]) {
      ++failed;
      std::cerr << "cfl-search " << to_string(t.kind) << " p=" << t.p
                << " alpha=" << alpha_field(t.alpha) << " " << t.mode << ": "
                << errors[i] << '\n';
      csv.row({method.name, to_string(t.kind), std::to_string(t.p),
               alpha_field(t.alpha), t.mode, "nan", "nan"});
      continue;
    }
    const auto& r = *results[i];
    csv.row({method.name, to_string(t.kind), std::to_string(t.p),
             alpha_field(t.alpha), t.mode, format_number(r.sharp_cfl),
             format_number(r.unstable_cfl)});
  }
  return failed ? kExitFailure : kExitSuccess;
}

// --------------------------------------------- converge / work-precision

struct StudyArgs {
  std::string method = "ssprk33";
  std::string kind = "gl";
  int p = 2;
  std::string resolutions = "20,40,80,160";
  std::string alphas = "0.001,0.1,0.25,0.49";
  std::string lambda = "1.0";
  bool uncut = false;
  std::optional<double> cfl;
  double safety = 0.95;
  double final_time = 1.0;
  double periods = 100.0;
  std::string initial = "sine";
};

struct Series {
  std::string name;
  std::optional<double> alpha;
  std::string mode;
  PenaltyConfig penalty;
  double cfl = 0.0;
};

struct Study {
  RKMethod method;
  NodeKind kind;
  std::vector<int> resolutions;
  std::vector<Series> series;
  std::vector<RunResult> runs;  // series-major
};

Study prepare_study(Context& ctx, const StudyArgs& args,
                    const std::vector<std::pair<std::string, LambdaChoice>>& named,
                    bool with_background) {
  Study study{as_usage([&] { return method_by_name(args.method); }),
              parse_kinds(args.kind).front(),
              as_usage([&] { return parse_int_list(args.resolutions); }),
              {},
              {}};
  if (args.p < 0 || args.p > kDefaultMaxDegree) {
    throw UsageError("degree out of range");
  }
  if (study.resolutions.size() < 2) {
    throw UsageError("need at least two resolutions");
  }
  for (int n : study.resolutions) {
    if (n < 4) {
      throw UsageError("resolutions must be at least 4");
    }
  }
  if (!(args.safety > 0.0) || !(args.final_time > 0.0) ||
      (args.cfl && !(*args.cfl > 0.0))) {
    throw UsageError("--safety, --final-time and --cfl must be positive");
  }
  if (!(ctx.common.speed > 0.0)) {
    throw UsageError("--speed must be positive");
  }
  const auto alphas = alphas_from(args.alphas);
  const LambdaTable table = make_lambda_table(ctx.common);
  if (with_background) {
    study.series.push_back({"background", std::nullopt, "background",
                            {1.0, false}});
  }
  for (const auto& [name, choice] : named) {
    const PenaltyConfig penalty = resolve(choice, table, study.kind, args.p);
    for (double a : alphas) {
      study.series.push_back({name, a, choice.mode, penalty});
    }
  }

  const int coarse = *std::min_element(study.resolutions.begin(),
                                       study.resolutions.end());
  CflSearchOptions opt;
  opt.grid.n_background = coarse;
  opt.grid.cut_cell = std::max(2, coarse / 2);
  opt.grid.speed = ctx.common.speed;
  opt.periods = args.periods;
  opt.initial = parse_initial(args.initial == "constant" ? "sine" : args.initial);
  opt.seed = ctx.common.seed;
  opt.norm.seed = ctx.common.seed;
  parallel_for(static_cast<int>(study.series.size()), ctx.jobs, [&](int i) {
    Series& s = study.series[i];
    const double sharp =
        args.cfl ? *args.cfl
                 : sharp_cfl_search(study.method, args.p, study.kind, s.alpha,
                                    s.penalty, s.mode, opt)
                       .sharp_cfl;
    s.cfl = args.safety * sharp;
  });

  std::function<double(double)> u0;
  if (args.initial == "constant") {
    u0 = [](double) { return 1.0; };
  } else if (args.initial == "sine") {
    u0 = [](double x) { return std::sin(2.0 * std::numbers::pi * x); };
  } else {
    throw UsageError("converge/work-precision need --initial sine|constant");
  }

  const std::size_t nres = study.resolutions.size();
  study.runs.resize(study.series.size() * nres);
  parallel_for(static_cast<int>(study.runs.size()), ctx.jobs, [&](int i) {
    const Series& s = study.series[i / nres];
    RunSpec spec;
    spec.method = study.method;
    spec.kind = study.kind;
    spec.p = args.p;
    spec.n_background = study.resolutions[i % nres];
    spec.alpha = s.alpha;
    spec.penalty = s.penalty;
    spec.cfl = s.cfl;
    spec.final_time = args.final_time;
    spec.speed = ctx.common.speed;
    study.runs[i] = run_advection(spec, u0);
  });
  return study;
}

void add_study_options(CLI::App* sub, StudyArgs& a) {
  sub->add_option("--method", a.method, "euler|ssprk22|ssprk33|ssprk104")
      ->capture_default_str();
  sub->add_option("--kind", a.kind, "gl|gll")->capture_default_str();
  sub->add_option("--p", a.p, "Polynomial degree")->capture_default_str();
  sub->add_option("--resolutions", a.resolutions, "Background cell counts")
      ->capture_default_str();
  sub->add_option("--alphas", a.alphas, "Cut-cell factors")
      ->capture_default_str();
  sub->add_option("--cfl", a.cfl,
                  "Sharp Courant number to scale (default: searched on the "
                  "coarsest mesh)");
  sub->add_option("--final-time", a.final_time)->capture_default_str();
  sub->add_option("--periods", a.periods,
                  "Horizon of the sharp-CFL search in periods")
      ->capture_default_str();
  sub->add_option("--initial", a.initial, "sine|constant")
      ->capture_default_str();
}

int cmd_converge(Context& ctx, const StudyArgs& args) {
  const auto lambdas = parse_lambdas(args.lambda);
  if (lambdas.size() != 1) {
    throw UsageError("converge takes a single --lambda");
  }
  const Study study =
      prepare_study(ctx, args, {{lambdas[0].mode, lambdas[0]}}, args.uncut);
  const std::size_t nres = study.resolutions.size();

  auto os = open_output(ctx.output("converge.csv"));
  CsvWriter csv(os, {"method", "kind", "p", "alpha", "lambda_mode",
                     "n_background", "cfl", "dt", "steps", "error"});
  auto os_orders = open_output(ctx.output("converge_orders.csv"));
  CsvWriter orders(os_orders, {"method", "kind", "p", "alpha", "lambda_mode",
                               "order"});
  int failed = 0;
  for (std::size_t s = 0; s < study.series.size(); ++s) {
    const Series& series = study.series[s];
    std::vector<double> errors;
    for (std::size_t r = 0; r < nres; ++r) {
      const RunResult& run = study.runs[s * nres + r];
      csv.row({study.method.name, to_string(study.kind), std::to_string(args.p),
               alpha_field(series.alpha), series.mode,
               std::to_string(run.n_background), format_number(series.cfl),
               format_number(run.dt), std::to_string(run.steps),
               format_number(run.error)});
      errors.push_back(run.error);
      if (!run.stable) {
        ++failed;
      }
    }
    double order = std::numeric_limits<double>::quiet_NaN();
    try {
      order = fitted_order(study.resolutions, errors);
    } catch (const std::invalid_argument&) {
      // Fewer than three points or zero error (free stream): no order.
    }
    orders.row({study.method.name, to_string(study.kind),
                std::to_string(args.p), alpha_field(series.alpha), series.mode,
                format_number(order)});
    std::cout << "alpha=" << (series.alpha ? alpha_field(series.alpha) : "uncut")
              << " lambda=" << series.mode << " order=" << format_number(order)
              << '\n';
  }
  if (failed) {
    std::cerr << failed << " run(s) became unstable\n";
  }
  return failed ? kExitFailure : kExitSuccess;
}

int cmd_work_precision(Context& ctx, const StudyArgs& args) {
  const auto fixed = parse_lambdas(args.lambda);
  std::vector<std::pair<std::string, LambdaChoice>> named;
  for (const auto& choice : fixed) {
    named.emplace_back(choice.optimized ? "optimized" : "lambda=" + choice.mode,
                       choice);
  }
  const Study study = prepare_study(ctx, args, named, true);
  const std::size_t nres = study.resolutions.size();

  auto os = open_output(ctx.output("work_precision.csv"));
  CsvWriter csv(os, {"series", "method", "kind", "p", "alpha", "lambda_mode",
                     "n_background", "cfl", "steps", "error"});
  int failed = 0;
  for (std::size_t s = 0; s < study.series.size(); ++s) {
    const Series& series = study.series[s];
    for (std::size_t r = 0; r < nres; ++r) {
      const RunResult& run = study.runs[s * nres + r];
      csv.row({series.name, study.method.name, to_string(study.kind),
               std::to_string(args.p), alpha_field(series.alpha), series.mode,
               std::to_string(run.n_background), format_number(series.cfl),
               std::to_string(run.steps), format_number(run.error)});
      if (!run.stable) {
        ++failed;
      }
    }
  }
  return failed ? kExitFailure : kExitSuccess;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) {
    return out;
  }
  for (const auto& raw : split(text, ',')) {
    const std::string item = trim(raw);
    if (item.empty()) {
      throw std::invalid_argument("empty item in list '" + text + "'");
    }
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_double(item));
      continue;
    }
    if (parts.size() != 3) {
      throw std::invalid_argument("range must be start:step:stop, got '" +
                                  item + "'");
    }
    const double start = parse_double(parts[0]);
    const double step = parse_double(parts[1]);
    const double stop = parse_double(parts[2]);
    if (!(step > 0.0) || stop < start) {
      throw std::invalid_argument("range needs step > 0 and stop >= start");
    }
    const double count = std::floor((stop - start) / step + 1e-9);
    if (count > 1e6) {
      throw std::invalid_argument("range too long");
    }
    for (long i = 0; i <= static_cast<long>(count); ++i) {
      out.push_back(tidy(start + static_cast<double>(i) * step));
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_real_list(text)) {
    if (v != std::round(v) || std::abs(v) > 1e9) {
      throw std::invalid_argument("expected integers, got " + format_number(v));
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

int run_cli(int argc, const char* const* argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  CLI::App app{"Operator norms, optimized penalty cutoffs and CFL studies for "
               "DG advection with a stabilized cut cell",
               "dodlab"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Common common;

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("opnorm-sweep", "Operator norms over a grid");
  add_common(sweep, common);
  add_grid(sweep, common);
  sweep->add_option("--kind", sweep_args.kind, "gl|gll")->capture_default_str();
  sweep->add_option("--p", sweep_args.p, "Degrees, e.g. 2,3,4 or 0:1:5")
      ->capture_default_str();
  sweep->add_option("--alphas", sweep_args.alphas, "Cut-cell factors")
      ->capture_default_str();
  sweep->add_option("--lambda", sweep_args.lambda,
                    "Penalty cutoffs; 'optimized' uses the shipped table")
      ->capture_default_str();
  sweep->add_option("--dump-operator", sweep_args.dump_operator,
                    "Write the first operator as row,col,value triplets");

  OptimizeArgs opt_args;
  auto* optimize = app.add_subcommand("optimize-lambda",
                                      "Min-max optimization of the cutoff");
  add_common(optimize, common);
  add_grid(optimize, common);
  optimize->add_option("--kind", opt_args.kind)->capture_default_str();
  optimize->add_option("--p", opt_args.p)->capture_default_str();
  optimize->add_option("--lambda-grid", opt_args.lambda_grid)
      ->capture_default_str();
  optimize->add_option("--alpha-grid", opt_args.alpha_grid)
      ->capture_default_str();
  optimize->add_option("--lambda-range", opt_args.lambda_range, "lo:hi")
      ->capture_default_str();
  optimize->add_option("--alpha-range", opt_args.alpha_range, "lo:hi")
      ->capture_default_str();
  optimize->add_option("--tol", opt_args.tol, "Final lambda bracket width")
      ->capture_default_str();

  CflArgs cfl_args;
  auto* cfl = app.add_subcommand("cfl-search", "Sharp CFL bisection");
  add_common(cfl, common);
  add_grid(cfl, common);
  cfl->add_option("--method", cfl_args.method)->capture_default_str();
  cfl->add_option("--kind", cfl_args.kind)->capture_default_str();
  cfl->add_option("--p", cfl_args.p)->capture_default_str();
  cfl->add_option("--alphas", cfl_args.alphas)->capture_default_str();
  cfl->add_option("--lambda", cfl_args.lambda,
                  "Numbers, 'optimized' or 'off'")
      ->capture_default_str();
  cfl->add_flag("--uncut", cfl_args.uncut, "Also search the uncut mesh");
  cfl->add_option("--periods", cfl_args.periods)->capture_default_str();
  cfl->add_option("--bracket", cfl_args.bracket, "lo:hi Courant numbers");
  cfl->add_option("--rel-tol", cfl_args.rel_tol)->capture_default_str();
  cfl->add_option("--criterion", cfl_args.criterion,
                  "bounded (no blow-up) or monotone (energy never grows)")
      ->capture_default_str();
  cfl->add_option("--initial", cfl_args.initial, "sine|random")
      ->capture_default_str();
  cfl->add_option("--dump-operator", cfl_args.dump_operator,
                  "Write the first operator as row,col,value triplets");

  StudyArgs conv_args;
  auto* conv = app.add_subcommand("converge", "Convergence study at T=1");
  add_common(conv, common);
  add_study_options(conv, conv_args);
  conv->add_option("--lambda", conv_args.lambda, "Number, 'optimized' or 'off'")
      ->capture_default_str();
  conv->add_flag("--uncut", conv_args.uncut, "Add the uncut mesh series");
  conv->add_option("--safety", conv_args.safety)->capture_default_str();

  StudyArgs wp_args;
  wp_args.safety = 0.99;
  wp_args.lambda = "1.0,optimized";
  wp_args.alphas = "0.001,0.25,0.49";
  auto* wp = app.add_subcommand("work-precision",
                                "Error against step count per series");
  add_common(wp, common);
  add_study_options(wp, wp_args);
  wp->add_option("--lambda", wp_args.lambda, "Series of cutoffs")
      ->capture_default_str();
  wp->add_option("--safety", wp_args.safety)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  Context ctx;
  ctx.common = common;
  int code = kExitSuccess;
  try {
    ctx.jobs = as_usage([&] { return resolve_jobs(common.jobs); });
    ctx.out = common.out;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec || !fs::is_directory(ctx.out)) {
      throw UsageError("cannot create output directory '" + common.out + "'");
    }
    if (active == sweep) {
      code = cmd_opnorm_sweep(ctx, sweep_args);
    } else if (active == optimize) {
      code = cmd_optimize(ctx, opt_args);
    } else if (active == cfl) {
      code = cmd_cfl_search(ctx, cfl_args);
    } else if (active == conv) {
      code = cmd_converge(ctx, conv_args);
    } else {
      code = cmd_work_precision(ctx, wp_args);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "Run with " << active->get_name() << " --help for usage.\n";
    return kExitUsage;
  } catch (const BracketError& e) {
    std::cerr << "error: " << e.what() << " (lo=" << e.lo()
              << ", hi=" << e.hi() << ")\n";
    code = kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kExitFailure;
  }

  json manifest;
  manifest["tool"] = "dodlab";
  manifest["version"] = version();
  manifest["subcommand"] = active->get_name();
  manifest["argv"] = std::vector<std::string>(argv, argv + argc);
  manifest["flags"] = flags_of(*active);
  manifest["seed"] = common.seed;
  manifest["jobs"] = ctx.jobs;
  manifest["started_utc"] = started;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  manifest["outputs"] = ctx.outputs;
  manifest["exit_code"] = code;
  try {
    auto os = open_output(ctx.out / "manifest.json");
    os << manifest.dump(2) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kExitFailure;
  }
  return code;
}

}  // namespace dodlab
