#ifndef DODLAB_MESH_HPP_
#define DODLAB_MESH_HPP_

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dodlab/quadrature.hpp"

namespace dodlab {

/// Nodal values, cell-major: entries [i*(p+1), (i+1)*(p+1)) belong to cell i.
using StateVector = Eigen::VectorXd;

struct Domain {
  double left = 0.0;
  double right = 1.0;

  double length() const { return right - left; }
};

/**
 * @brief Periodic 1D mesh of equal background cells with at most one split
 * background cell.
 *
 * Cells are numbered from 0. When `cut` is set, cell `*cut` is the small cut
 * cell of width alpha*dx and cell `*cut + 1` its outflow neighbour of width
 * (1 - alpha)*dx. The inflow neighbour of cell 0 is the last cell.
 */
struct CutMesh {
  Domain domain;
  int n_background = 0;
  std::optional<int> cut;
  double alpha = 0.0;
  std::vector<double> widths;

  int num_cells() const { return static_cast<int>(widths.size()); }
  double background_dx() const { return domain.length() / n_background; }
  /// Left vertex of each cell plus the right domain end (num_cells()+1 values).
  std::vector<double> vertices() const;
};

/**
 * Splits background cell number `cut_cell` (counted from 1, so the default
 * "cut between cells 25 and 26" is cut_cell = 25) into cells of width
 * alpha*dx and (1-alpha)*dx, giving n_background + 1 cells.
 *
 * Requires n_background >= 4, 0 < alpha <= 1/2 and
 * 2 <= cut_cell <= n_background - 1 so the stabilised stencil c-1..c+1 does
 * not wrap around the periodic boundary.
 */
CutMesh make_mesh(Domain domain, int n_background, int cut_cell, double alpha);

/// Uncut equidistant mesh of n_cells cells (the background scheme's mesh).
CutMesh make_uniform_mesh(Domain domain, int n_cells);

/// Physical coordinates of every nodal degree of freedom, cell-major.
Eigen::VectorXd node_coordinates(const CutMesh& mesh,
                                 const QuadratureRule& rule);

/// Nodal interpolation of f.
StateVector project_initial_condition(const CutMesh& mesh,
                                      const QuadratureRule& rule,
                                      const std::function<double(double)>& f);

/// Diagonal of the global mass matrix: w_j * dx_i / 2.
Eigen::VectorXd mass_diagonal(const CutMesh& mesh, const QuadratureRule& rule);

}  // namespace dodlab

#endif  // DODLAB_MESH_HPP_
