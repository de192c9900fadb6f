#include "dodlab/mesh.hpp"

#include <stdexcept>
#include <string>

namespace dodlab {

std::vector<double> CutMesh::vertices() const {
  std::vector<double> v(widths.size() + 1);
  v[0] = domain.left;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    v[i + 1] = v[i] + widths[i];
  }
  v.back() = domain.right;
  return v;
}

CutMesh make_mesh(Domain domain, int n_background, int cut_cell,
                  double alpha) {
  if (!(domain.length() > 0.0)) {
    throw std::invalid_argument("domain must have positive length");
  }
  if (n_background < 4) {
    throw std::invalid_argument("a cut mesh needs at least 4 background cells");
  }
  if (!(alpha > 0.0 && alpha <= 0.5)) {
    throw std::invalid_argument("cut-cell factor must lie in (0, 1/2]");
  }
  const int n_cells = n_background + 1;
  if (cut_cell < 2 || cut_cell > n_cells - 2) {
    throw std::invalid_argument(
        "cut cell " + std::to_string(cut_cell) + " must lie in [2, " +
        std::to_string(n_cells - 2) + "] so its stencil does not wrap");
  }
  CutMesh mesh{domain, n_background, cut_cell - 1, alpha, {}};
  const double dx = mesh.background_dx();
  mesh.widths.assign(n_cells, dx);
  mesh.widths[cut_cell - 1] = alpha * dx;
  mesh.widths[cut_cell] = (1.0 - alpha) * dx;
  return mesh;
}

CutMesh make_uniform_mesh(Domain domain, int n_cells) {
  if (!(domain.length() > 0.0)) {
    throw std::invalid_argument("domain must have positive length");
  }
  if (n_cells < 1) {
    throw std::invalid_argument("a mesh needs at least one cell");
  }
  CutMesh mesh{domain, n_cells, std::nullopt, 0.0, {}};
  mesh.widths.assign(n_cells, mesh.background_dx());
  return mesh;
}

Eigen::VectorXd node_coordinates(const CutMesh& mesh,
                                 const QuadratureRule& rule) {
  const int n = rule.size();
  const auto v = mesh.vertices();
  Eigen::VectorXd x(n * mesh.num_cells());
  for (int i = 0; i < mesh.num_cells(); ++i) {
    const double mid = 0.5 * (v[i] + v[i + 1]);
    const double half = 0.5 * mesh.widths[i];
    for (int j = 0; j < n; ++j) {
      x(i * n + j) = mid + rule.nodes[j] * half;
    }
  }
  return x;
}

StateVector project_initial_condition(const CutMesh& mesh,
                                      const QuadratureRule& rule,
                                      const std::function<double(double)>& f) {
  return node_coordinates(mesh, rule).unaryExpr(f);
}

Eigen::VectorXd mass_diagonal(const CutMesh& mesh, const QuadratureRule& rule) {
  const int n = rule.size();
  Eigen::VectorXd m(n * mesh.num_cells());
  for (int i = 0; i < mesh.num_cells(); ++i) {
    for (int j = 0; j < n; ++j) {
      m(i * n + j) = rule.weights[j] * 0.5 * mesh.widths[i];
    }
  }
  return m;
}

}  // namespace dodlab
