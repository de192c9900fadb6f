#include "dodlab/global_operator.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dodlab {

double eta(const PenaltyConfig& penalty, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 0.5)) {
    throw std::invalid_argument("cut-cell factor must lie in [0, 1/2]");
  }
  if (!penalty.enabled) {
    return 0.0;
  }
  if (!(penalty.lambda_c > 0.0)) {
    throw std::invalid_argument("lambda_c must be positive");
  }
  return 1.0 - std::min(1.0, alpha / penalty.lambda_c);
}

std::string_view block_name(StabilizedBlock block) {
  switch (block) {
    case StabilizedBlock::kPrevDiag: return "L_(c-1)";
    case StabilizedBlock::kPrevRight: return "L_(c-1)R";
    case StabilizedBlock::kPrevLeft: return "L_(c-1)L";
    case StabilizedBlock::kCutLeft: return "L_cL";
    case StabilizedBlock::kCutDiag: return "L_c";
    case StabilizedBlock::kNextLeftLeft: return "L_(c+1)LL";
    case StabilizedBlock::kNextLeft: return "L_(c+1)L";
    case StabilizedBlock::kNextDiag: return "L_(c+1)";
  }
  return "?";
}

GlobalOperator::GlobalOperator(CutMesh mesh, LagrangeOperators ops,
                               std::optional<CutInterpolation> cut,
                               AdvectionConfig advection, PenaltyConfig penalty,
                               double eta)
    : mesh_(std::move(mesh)),
      ops_(std::move(ops)),
      cut_(std::move(cut)),
      advection_(advection),
      penalty_(penalty),
      eta_(eta),
      rows_(mesh_.num_cells()),
      mass_(mass_diagonal(mesh_, ops_.rule)) {}

bool GlobalOperator::has_block(int row_cell, int col_cell) const {
  const auto& r = rows_.at(row_cell);
  return std::any_of(r.begin(), r.end(),
                     [&](const Block& b) { return b.col == col_cell; });
}

const Eigen::MatrixXd& GlobalOperator::block(int row_cell, int col_cell) const {
  for (const auto& b : rows_.at(row_cell)) {
    if (b.col == col_cell) {
      return b.matrix;
    }
  }
  throw std::out_of_range("no block (" + std::to_string(row_cell) + ", " +
                          std::to_string(col_cell) + ")");
}

Eigen::MatrixXd GlobalOperator::stabilized_block(StabilizedBlock which) const {
  if (!mesh_.cut) {
    throw std::logic_error("stabilised blocks need a cut mesh");
  }
  const int c = *mesh_.cut;
  const int n = num_cells();
  const auto at = [&](int r, int col) -> Eigen::MatrixXd {
    col = (col + n) % n;
    if (!has_block(r, col)) {
      return Eigen::MatrixXd::Zero(block_size(), block_size());
    }
    return block(r, col);
  };
  switch (which) {
    case StabilizedBlock::kPrevDiag: return at(c - 1, c - 1);
    case StabilizedBlock::kPrevRight: return at(c - 1, c);
    case StabilizedBlock::kPrevLeft: return at(c - 1, c - 2);
    case StabilizedBlock::kCutLeft: return at(c, c - 1);
    case StabilizedBlock::kCutDiag: return at(c, c);
    case StabilizedBlock::kNextLeftLeft: return at(c + 1, c - 1);
    case StabilizedBlock::kNextLeft: return at(c + 1, c);
    case StabilizedBlock::kNextDiag: return at(c + 1, c + 1);
  }
  throw std::logic_error("unknown block");
}

void GlobalOperator::apply(const StateVector& u, StateVector& out) const {
  if (u.size() != size()) {
    throw std::invalid_argument("state has " + std::to_string(u.size()) +
                                " entries, operator expects " +
                                std::to_string(size()));
  }
  const int m = block_size();
  out.resize(size());
  for (int i = 0; i < num_cells(); ++i) {
    auto dst = out.segment(i * m, m);
    dst.setZero();
    for (const auto& b : rows_[i]) {
      dst.noalias() += b.matrix * u.segment(b.col * m, m);
    }
  }
}

StateVector GlobalOperator::apply(const StateVector& u) const {
  StateVector out;
  apply(u, out);
  return out;
}

void GlobalOperator::apply_transpose(const StateVector& u,
                                     StateVector& out) const {
  if (u.size() != size()) {
    throw std::invalid_argument("state size does not match operator");
  }
  const int m = block_size();
  out = StateVector::Zero(size());
  for (int i = 0; i < num_cells(); ++i) {
    for (const auto& b : rows_[i]) {
      out.segment(b.col * m, m).noalias() +=
          b.matrix.transpose() * u.segment(i * m, m);
    }
  }
}

Eigen::MatrixXd GlobalOperator::dense() const {
  if (size() > kMaxDenseSize) {
    throw std::length_error("operator with " + std::to_string(size()) +
                            " unknowns is too large for a dense copy");
  }
  const int m = block_size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size(), size());
  for (int i = 0; i < num_cells(); ++i) {
    for (const auto& b : rows_[i]) {
      a.block(i * m, b.col * m, m, m) += b.matrix;
    }
  }
  return a;
}

std::vector<Triplet> GlobalOperator::triplets() const {
  const int m = block_size();
  std::vector<Triplet> out;
  for (int i = 0; i < num_cells(); ++i) {
    auto blocks = rows_[i];
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& x, const Block& y) { return x.col < y.col; });
    for (int r = 0; r < m; ++r) {
      for (const auto& b : blocks) {
        for (int c = 0; c < m; ++c) {
          if (b.matrix(r, c) != 0.0) {
            out.push_back({i * m + r, b.col * m + c, b.matrix(r, c)});
          }
        }
      }
    }
  }
  return out;
}

void GlobalOperator::write_triplets(std::ostream& os) const {
  os << "# dodlab operator: " << size() << " x " << size() << ", kind "
     << to_string(rule().kind) << ", p " << rule().degree << ", cells "
     << num_cells() << ", eta " << std::setprecision(17) << eta_ << "\n";
  os << "# row col value\n";
  for (const auto& t : triplets()) {
    os << t.row << ' ' << t.col << ' ' << t.value << '\n';
  }
}

GlobalOperator assemble(const CutMesh& mesh, const QuadratureRule& rule,
                        const AdvectionConfig& advection,
                        const PenaltyConfig& penalty) {
  if (!(advection.speed > 0.0)) {
    throw std::invalid_argument("advection speed must be positive");
  }
  if (penalty.enabled && !(penalty.lambda_c > 0.0)) {
    throw std::invalid_argument("lambda_c must be positive");
  }
  if (static_cast<int>(mesh.widths.size()) < 2) {
    throw std::invalid_argument("operator needs at least two cells");
  }
  if (mesh.cut && !(mesh.alpha >= kMinAssemblyAlpha)) {
    throw std::invalid_argument("cut-cell factor below assembly minimum");
  }

  LagrangeOperators ops = build_operators(rule);
  std::optional<CutInterpolation> cut;
  double eta_c = 0.0;
  // 1 - eta evaluated directly so it keeps full relative precision when
  // alpha is tiny.
  double keep = 1.0;
  if (mesh.cut) {
    cut = build_cut_interpolation(rule, mesh.alpha);
    eta_c = eta(penalty, mesh.alpha);
    keep = penalty.enabled ? std::min(1.0, mesh.alpha / penalty.lambda_c) : 1.0;
  }

  const double a = advection.speed;
  const Eigen::VectorXd inv_mass = ops.mass.cwiseInverse();
  const Eigen::MatrixXd dtm = ops.derivative.transpose() * ops.mass.asDiagonal();
  const Eigen::MatrixXd b_right = ops.boundary_right();
  const Eigen::MatrixXd b_left = ops.boundary_left();
  // M^-1 (D^T M - B_R) and M^-1 B_L, shared by every background row.
  const Eigen::MatrixXd volume = inv_mass.asDiagonal() * (dtm - b_right);
  const Eigen::MatrixXd inflow = inv_mass.asDiagonal() * b_left;

  GlobalOperator op(mesh, ops, cut, advection, penalty, eta_c);
  const int n = mesh.num_cells();
  const auto upwind = [n](int i) { return (i + n - 1) % n; };
  const auto scale = [&](int i) { return 2.0 * a / mesh.widths[i]; };

  for (int i = 0; i < n; ++i) {
    op.rows_[i].push_back({upwind(i), scale(i) * inflow});
    op.rows_[i].push_back({i, scale(i) * volume});
  }
  if (!mesh.cut) {
    return op;
  }

  const int c = *mesh.cut;
  const Eigen::MatrixXd& ext = cut->interpolation;
  const bool stabilized = penalty.enabled;

  // Row c-1: the J^1 volume term tested with the extended inflow basis.
  if (stabilized) {
    const Eigen::MatrixXd ext_dtm = ext.transpose() * dtm;
    op.rows_[c - 1][1].matrix -=
        scale(c - 1) * eta_c * inv_mass.asDiagonal() * (ext_dtm * ext);
    op.rows_[c - 1].push_back(
        {c, scale(c - 1) * eta_c * inv_mass.asDiagonal() * ext_dtm});
  }

  // Row c. Exact integration by parts on the cut cell gives
  //   D^T M I - R^T B_J = -B_L - alpha M I D,
  // so L_cL = S_c (1-eta) M^-1 B_L - S_c alpha eta I D. Written this way the
  // 1/alpha in S_c cancels analytically instead of in rounding.
  const double cut_scale = scale(c);
  const double background_scale = 2.0 * a / mesh.background_dx();
  op.rows_[c][0].matrix = cut_scale * keep * inflow;
  if (stabilized) {
    op.rows_[c][0].matrix -= background_scale * eta_c * (ext * ops.derivative);
  }
  op.rows_[c][1].matrix = cut_scale * keep * volume;

  // Row c+1: J^0 redistributes the cut cell's outflow.
  op.rows_[c + 1][0].matrix = scale(c + 1) * keep * inflow;
  if (stabilized) {
    op.rows_[c + 1].push_back(
        {c - 1, scale(c + 1) * eta_c * inv_mass.asDiagonal() *
                    (ops.left.transpose() * cut->outflow)});
  }
  return op;
}

}  // namespace dodlab
