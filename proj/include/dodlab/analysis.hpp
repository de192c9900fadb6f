#ifndef DODLAB_ANALYSIS_HPP_
#define DODLAB_ANALYSIS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dodlab/global_operator.hpp"
#include "dodlab/mesh.hpp"
#include "dodlab/norms.hpp"
#include "dodlab/quadrature.hpp"
#include "dodlab/timestepping.hpp"

namespace dodlab {

/// Worker count: explicit value if positive, else DODLAB_JOBS, else cores.
int resolve_jobs(std::optional<int> requested);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// thrown by any task is rethrown after all workers have stopped.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// Background grid used throughout: 50 cells of width 1/50 on (0, 1), one of
/// them split so the mesh has 51 cells with the small cell at index 25.
struct GridSpec {
  Domain domain{0.0, 1.0};
  int n_background = 50;
  int cut_cell = 25;  // 1-based index of the small cell
  double speed = 1.0;

  double dx() const { return domain.length() / n_background; }
  CutMesh mesh(double alpha) const;
  CutMesh uniform_mesh() const;
};

GlobalOperator build_operator(const GridSpec& grid, NodeKind kind, int p,
                              std::optional<double> alpha,
                              const PenaltyConfig& penalty);

// ---------------------------------------------------------------- sweeps

/// Shipped optimizer output for p = 0..kOptimizedLambdaMaxDegree.
inline constexpr int kOptimizedLambdaMaxDegree = 5;
std::optional<double> shipped_optimized_lambda(NodeKind kind, int p);

/// Optimized lambda lookup that honours an override table when set.
class LambdaTable {
 public:
  LambdaTable() = default;
  /// Reads a CSV with at least the columns kind, p, lambda_star.
  static LambdaTable from_csv(const std::string& path);

  void add(NodeKind kind, int p, double lambda_c);

  double lookup(NodeKind kind, int p) const;

 private:
  std::vector<std::tuple<NodeKind, int, double>> entries_;
};


struct SweepSpec {
  NodeKind kind = NodeKind::GaussLobattoLegendre;
  std::vector<int> degrees;
  std::vector<double> alphas;
  std::vector<double> lambdas;
  /// Also sweep, per degree, the shipped optimized lambda.
  bool include_optimized = false;
  LambdaTable lambda_table;
  GridSpec grid;
  NormOptions norm;

  void validate() const;
};

struct SweepRow {
  NodeKind kind;
  int p;
  double lambda_c;
  double alpha;
  double norm_dod;
  /// ||L||_M of the uncut background mesh at the same p and node kind.
  double norm_background;
  double quotient;
  bool ok = true;
  std::string error;
};

/// Rows ordered by degree, then lambda (explicit values before the
/// optimized one), then alpha, independent of `jobs`.
std::vector<SweepRow> opnorm_sweep(const SweepSpec& spec, int jobs = 1);

// ------------------------------------------------------------- optimizer

struct OptimizerOptions {
  int lambda_grid = 51;
  int alpha_grid = 51;
  double lambda_lo = 0.001;
  double lambda_hi = 1.0;
  double alpha_lo = 0.01;
  double alpha_hi = 0.5;
  double tolerance = 1e-4;
  GridSpec grid;
  NormOptions norm;
};

struct OptimizerResult {
  NodeKind kind;
  int p;
  double lambda_star;
  double worst_alpha;
  /// max over the alpha grid of ||L(lambda_star, alpha)||_M.
  double minmax_norm;
  double coarse_minmax_norm;
  int lambda_grid;
  int alpha_grid;
  double bracket_width;
  int evaluations;
};

/// Grid search over lambda, then golden-section refinement of the best
/// coarse bracket. The inner maximum over alpha is always taken on the
/// alpha grid and evaluated with `jobs` threads.
OptimizerResult optimize_lambda(int p, NodeKind kind,
                                const OptimizerOptions& options = {},
                                int jobs = 1);

/// Max over `alphas` of ||L(lambda_c, alpha)||_M; also returns the argmax.
std::pair<double, double> worst_case_norm(const GridSpec& grid, NodeKind kind,
                                          int p, double lambda_c,
                                          const std::vector<double>& alphas,
                                          const NormOptions& norm, int jobs);

std::vector<double> linspace(double lo, double hi, int n);

// ------------------------------------------------------------ CFL search

enum class InitialCondition { kSine, kRandom };

/// kBounded: the run reaches the horizon without blow-up (see EvolveOptions).
/// kMonotoneEnergy: ||u||_M never exceeds (1 + energy_tol) ||u0||_M.
enum class StabilityCriterion { kBounded, kMonotoneEnergy };

struct CflSearchOptions {
  /// Number of periods of the domain to integrate.
  double periods = 100.0;
  std::optional<std::pair<double, double>> bracket;
  double rel_tol = 1e-3;
  double energy_tol = 1e-10;
  StabilityCriterion criterion = StabilityCriterion::kBounded;
  InitialCondition initial = InitialCondition::kSine;
  std::uint64_t seed = 20240521;
  GridSpec grid;
  NormOptions norm;
};

struct CflResult {
  std::string method;
  int p;
  NodeKind kind;
  std::optional<double> alpha;
  std::string lambda_mode;
  double lambda_c;
  /// Largest Courant number a dt / dx (background dx) verified stable.
  double sharp_cfl;
  /// Smallest Courant number verified unstable.
  double unstable_cfl;
  double bracket_width;
  int evaluations;
};

/// True when evolving to the horizon at Courant number `cfl` satisfies
/// options.criterion.
bool is_energy_stable(const RKMethod& method, const GlobalOperator& op,
                      double cfl, const CflSearchOptions& options);

/// Geometric bisection on the Courant number. `alpha` empty means the uncut
/// background mesh. Throws BracketError on an invalid user bracket.
CflResult sharp_cfl_search(const RKMethod& method, int p, NodeKind kind,
                           std::optional<double> alpha,
                           const PenaltyConfig& penalty,
                           const std::string& lambda_mode,
                           const CflSearchOptions& options = {});

// ------------------------------------------------------------ scaling fit

struct ScalingFit {
  double exponent;
  double prefactor;
  /// RMS residual in log space.
  double residual;
};

/// Least-squares fit ys ~ prefactor * xs^exponent.
ScalingFit scaling_fit(const std::vector<double>& xs,
                       const std::vector<double>& ys);

// ------------------------------------------------- convergence studies

struct RunSpec {
  RKMethod method;
  NodeKind kind = NodeKind::GaussLegendre;
  int p = 1;
  int n_background = 20;
  std::optional<double> alpha;  // empty: uncut
  PenaltyConfig penalty;
  double cfl = 0.5;
  double final_time = 1.0;
  Domain domain{0.0, 1.0};
  double speed = 1.0;
};

struct RunResult {
  int n_background;
  std::optional<double> alpha;
  double dt;
  long steps;
  double error;
  bool stable;
};

/// Evolves u0 to final_time and measures ||u - u0(x - a T)||_M, with the
/// exact solution evaluated periodically at the nodes. The cut sits in the
/// middle of the background grid.
RunResult run_advection(const RunSpec& spec,
                        const std::function<double(double)>& u0);

/// Least-squares slope of -log(error) against log(resolution).
double fitted_order(const std::vector<int>& resolutions,
                    const std::vector<double>& errors);

}  // namespace dodlab

#endif  // DODLAB_ANALYSIS_HPP_
