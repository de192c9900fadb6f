#ifndef DODLAB_GLOBAL_OPERATOR_HPP_
#define DODLAB_GLOBAL_OPERATOR_HPP_

#include <array>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dodlab/lagrange_ops.hpp"
#include "dodlab/mesh.hpp"

namespace dodlab {

/// Cutoff lambda_c of the penalty eta = 1 - min(1, alpha / lambda_c).
struct PenaltyConfig {
  double lambda_c = 1.0;
  bool enabled = true;
};

struct AdvectionConfig {
  double speed = 1.0;
};

/// eta(alpha); 0 when the penalty is disabled. Requires 0 <= alpha <= 1/2.
double eta(const PenaltyConfig& penalty, double alpha);

/// The eight blocks of the three rows touched by the stabilisation.
enum class StabilizedBlock {
  kPrevDiag,       // L_(c-1)
  kPrevRight,      // L_(c-1)R
  kPrevLeft,       // L_(c-1)L
  kCutLeft,        // L_cL
  kCutDiag,        // L_c
  kNextLeftLeft,   // L_(c+1)LL
  kNextLeft,       // L_(c+1)L
  kNextDiag,       // L_(c+1)
};

inline constexpr std::array<StabilizedBlock, 8> kStabilizedBlocks = {
    StabilizedBlock::kPrevDiag,      StabilizedBlock::kPrevRight,
    StabilizedBlock::kPrevLeft,      StabilizedBlock::kCutLeft,
    StabilizedBlock::kCutDiag,       StabilizedBlock::kNextLeftLeft,
    StabilizedBlock::kNextLeft,      StabilizedBlock::kNextDiag};

std::string_view block_name(StabilizedBlock block);

struct Triplet {
  int row;
  int col;
  double value;
};

/**
 * @brief Block-sparse right-hand side L of du/dt = L u for linear advection
 * with the domain-of-dependence stabilisation of the small cut cell.
 *
 * Row i holds the diagonal block and the upwind block (i, i-1 mod N). When
 * the mesh has a cut and the penalty is enabled, row c-1 also couples to the
 * cut cell and row c+1 to cell c-1. Immutable after assembly; apply() may be
 * called from several threads at once.
 */
class GlobalOperator {
 public:
  struct Block {
    int col;
    Eigen::MatrixXd matrix;
  };

  const CutMesh& mesh() const { return mesh_; }
  const QuadratureRule& rule() const { return ops_.rule; }
  const LagrangeOperators& reference() const { return ops_; }
  /// Present only for cut meshes.
  const std::optional<CutInterpolation>& cut_interpolation() const {
    return cut_;
  }
  const AdvectionConfig& advection() const { return advection_; }
  const PenaltyConfig& penalty() const { return penalty_; }
  double eta() const { return eta_; }

  int block_size() const { return ops_.size(); }
  int num_cells() const { return mesh_.num_cells(); }
  int size() const { return block_size() * num_cells(); }

  const std::vector<Block>& row(int cell) const { return rows_.at(cell); }
  bool has_block(int row_cell, int col_cell) const;
  /// Throws std::out_of_range for a structurally absent block.
  const Eigen::MatrixXd& block(int row_cell, int col_cell) const;
  /// Named stabilised block; a zero matrix when structurally absent.
  /// Throws std::logic_error on an uncut mesh.
  Eigen::MatrixXd stabilized_block(StabilizedBlock which) const;

  /// Diagonal of the global mass matrix M.
  const Eigen::VectorXd& mass() const { return mass_; }

  StateVector apply(const StateVector& u) const;
  void apply(const StateVector& u, StateVector& out) const;
  void apply_transpose(const StateVector& u, StateVector& out) const;

  /// Dense copy. Throws std::length_error above kMaxDenseSize unknowns.
  Eigen::MatrixXd dense() const;

  std::vector<Triplet> triplets() const;
  /// Plain text: a comment header then "row col value" per nonzero.
  void write_triplets(std::ostream& os) const;

  static constexpr int kMaxDenseSize = 20000;

 private:
  friend GlobalOperator assemble(const CutMesh&, const QuadratureRule&,
                                 const AdvectionConfig&, const PenaltyConfig&);
  GlobalOperator(CutMesh mesh, LagrangeOperators ops,
                 std::optional<CutInterpolation> cut, AdvectionConfig advection,
                 PenaltyConfig penalty, double eta);

  CutMesh mesh_;
  LagrangeOperators ops_;
  std::optional<CutInterpolation> cut_;
  AdvectionConfig advection_;
  PenaltyConfig penalty_;
  double eta_ = 0.0;
  std::vector<std::vector<Block>> rows_;
  Eigen::VectorXd mass_;
};

/// Smallest cut-cell factor accepted by assemble().
inline constexpr double kMinAssemblyAlpha = 1e-12;

GlobalOperator assemble(const CutMesh& mesh, const QuadratureRule& rule,
                        const AdvectionConfig& advection,
                        const PenaltyConfig& penalty);

}  // namespace dodlab

#endif  // DODLAB_GLOBAL_OPERATOR_HPP_
