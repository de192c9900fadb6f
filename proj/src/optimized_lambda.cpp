// Generated by tools/gen_lambda_table.py from `dodlab optimize-lambda` output.
#include <array>
#include <optional>

#include "dodlab/analysis.hpp"

namespace dodlab {

namespace {

constexpr std::array<double, kOptimizedLambdaMaxDegree + 1> kGaussLegendre = {
    1.0,  // p = 0
    0.7892663265675081,  // p = 1
    0.44357544218916933,  // p = 2
    0.2802089496108113,  // p = 3
    0.1963134569311671,  // p = 4
    0.15000113097137618,  // p = 5
};

constexpr std::array<double, kOptimizedLambdaMaxDegree + 1> kGaussLobatto = {
    1.0,  // p = 0
    0.8770278594369596,  // p = 1
    0.5406754470356445,  // p = 2
    0.3195665527617832,  // p = 3
    0.22404364334077947,  // p = 4
    0.1609313464598394,  // p = 5
};

}  // namespace

std::optional<double> shipped_optimized_lambda(NodeKind kind, int p) {
  if (p < 0 || p > kOptimizedLambdaMaxDegree) {
    return std::nullopt;
  }
  const double v = kind == NodeKind::GaussLegendre ? kGaussLegendre[p]
                                                   : kGaussLobatto[p];
  if (!(v > 0.0)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace dodlab
