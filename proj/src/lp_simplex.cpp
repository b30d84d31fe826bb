#include "cosparse/lp.hpp"

#include <cmath>
#include <limits>

namespace cosparse::lp {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

class Tableau {
public:
  Tableau(Matrix const &a, Vector const &b) : rows_(a.rows()), cols_(a.cols()) {
    // [A | I | b] with artificial columns cols_ .. cols_ + rows_ - 1.
    t_ = Matrix::Zero(rows_, cols_ + rows_ + 1);
    basis_.resize(static_cast<std::size_t>(rows_));
    for (Index i = 0; i < rows_; ++i) {
      double const sign = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(cols_) = sign * a.row(i);
      t_(i, cols_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
      basis_[static_cast<std::size_t>(i)] = cols_ + i;
    }
    active_.assign(static_cast<std::size_t>(rows_), true);
  }

  Index rhs() const { return cols_ + rows_; }

  // Reduced costs r_j = c_j - c_B^T B^-1 A_j for the given column costs.
  Vector reduced_costs(Vector const &cost) const {
    Vector r = cost;
    for (Index i = 0; i < rows_; ++i) {
      if (!active_[static_cast<std::size_t>(i)]) { continue; }
      double const cb = cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) { r -= cb * t_.row(i).head(cost.size()).transpose(); }
    }
    return r;
  }

  void pivot(Index row, Index col) {
    t_.row(row) /= t_(row, col);
    for (Index i = 0; i < rows_; ++i) {
      if (i == row || !active_[static_cast<std::size_t>(i)]) { continue; }
      double const f = t_(i, col);
      if (f != 0.0) { t_.row(i) -= f * t_.row(row); }
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Bland's rule on columns [0, ncols). Returns the terminal status.
  Status run(Vector const &cost, Index ncols, long &pivots, long max_pivots) {
    while (true) {
      Vector const r = reduced_costs(cost);
      Index enter = -1;
      for (Index j = 0; j < ncols; ++j) {
        if (r(j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) { return Status::optimal; }
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < rows_; ++i) {
        if (!active_[static_cast<std::size_t>(i)]) { continue; }
        double const a = t_(i, enter);
        if (a <= kPivotTol) { continue; }
        double const ratio = t_(i, rhs()) / a;
        if (ratio < best - 1e-12 ||
            (std::abs(ratio - best) <= 1e-12 && basis_[static_cast<std::size_t>(i)] <
                                                    basis_[static_cast<std::size_t>(leave)])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave < 0) { return Status::unbounded; }
      if (pivots >= max_pivots) { return Status::pivot_limit; }
      pivot(leave, enter);
      ++pivots;
    }
  }

  // Replace artificial basics by original columns; drop redundant rows.
  void expel_artificials() {
    for (Index i = 0; i < rows_; ++i) {
      if (!active_[static_cast<std::size_t>(i)] || basis_[static_cast<std::size_t>(i)] < cols_) { continue; }
      Index col = -1;
      for (Index j = 0; j < cols_; ++j) {
        if (std::abs(t_(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        active_[static_cast<std::size_t>(i)] = false;
      }
    }
  }

  double value_of_row(Index i) const { return t_(i, rhs()); }
  Index rows() const { return rows_; }
  bool active(Index i) const { return active_[static_cast<std::size_t>(i)]; }
  Index basic(Index i) const { return basis_[static_cast<std::size_t>(i)]; }

private:
  Index rows_;
  Index cols_;
  Matrix t_;
  std::vector<Index> basis_;
  std::vector<bool> active_;
};

} // namespace

Result solve_standard_form(Matrix const &a, Vector const &b, Vector const &c, long max_pivots) {
  if (a.rows() != b.size() || a.cols() != c.size()) {
    throw InvalidArgument("lp: inconsistent shapes");
  }
  Index const rows = a.rows();
  Index const cols = a.cols();
  Result out;
  Tableau tab(a, b);

  // Phase 1: minimize the sum of artificials.
  Vector phase1 = Vector::Zero(cols + rows);
  phase1.tail(rows).setOnes();
  out.status = tab.run(phase1, cols + rows, out.pivots, max_pivots);
  if (out.status == Status::pivot_limit) { return out; }
  double infeasibility = 0.0;
  for (Index i = 0; i < rows; ++i) {
    if (tab.basic(i) >= cols) { infeasibility += tab.value_of_row(i); }
  }
  if (infeasibility > 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
    out.status = Status::infeasible;
    return out;
  }
  tab.expel_artificials();

  // Phase 2 over original columns only.
  Vector phase2 = Vector::Zero(cols + rows);
  phase2.head(cols) = c;
  out.status = tab.run(phase2, cols, out.pivots, max_pivots);
  if (out.status != Status::optimal) { return out; }

  std::vector<Index> kept_rows;
  for (Index i = 0; i < rows; ++i) {
    if (tab.active(i)) {
      kept_rows.push_back(i);
      out.basis.push_back(tab.basic(i));
    }
  }
  out.x = Vector::Zero(cols);
  for (std::size_t r = 0; r < kept_rows.size(); ++r) {
    out.x(out.basis[r]) = std::max(0.0, tab.value_of_row(kept_rows[r]));
  }

  // Refine the basic solution against the original data.
  Index const nb = static_cast<Index>(kept_rows.size());
  if (nb > 0) {
    Matrix bmat(nb, nb);
    Vector rhs(nb);
    for (Index r = 0; r < nb; ++r) {
      rhs(r) = b(kept_rows[static_cast<std::size_t>(r)]);
      for (Index q = 0; q < nb; ++q) {
        bmat(r, q) = a(kept_rows[static_cast<std::size_t>(r)], out.basis[static_cast<std::size_t>(q)]);
      }
    }
    Eigen::FullPivLU<Matrix> lu(bmat);
    if (lu.isInvertible()) {
      Vector xb = lu.solve(rhs);
      Vector refined = Vector::Zero(cols);
      for (Index q = 0; q < nb; ++q) { refined(out.basis[static_cast<std::size_t>(q)]) = std::max(0.0, xb(q)); }
      if ((a * refined - b).norm() <= (a * out.x - b).norm()) { out.x = refined; }
      // Duals y with B^T y = c_B give exact reduced costs c - A^T y.
      Vector cb(nb);
      for (Index q = 0; q < nb; ++q) { cb(q) = c(out.basis[static_cast<std::size_t>(q)]); }
      Vector y = lu.transpose().solve(cb);
      Matrix a_kept(nb, cols);
      for (Index r = 0; r < nb; ++r) { a_kept.row(r) = a.row(kept_rows[static_cast<std::size_t>(r)]); }
      out.reduced_costs = c - a_kept.transpose() * y;
    }
  }
  if (out.reduced_costs.size() == 0) { out.reduced_costs = c; }
  out.objective = c.dot(out.x);
  return out;
}

} // namespace cosparse::lp
