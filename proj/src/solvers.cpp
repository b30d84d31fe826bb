#include "cosparse/solvers.hpp"

#include "cosparse/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cosparse {

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
  case ConstraintKind::equality:
    return "equality";
  case ConstraintKind::l2_ball:
    return "l2-ball";
  case ConstraintKind::dantzig:
    return "dantzig";
  }
  return "unknown";
}

ConstraintKind parse_constraint_kind(std::string_view text) {
  if (text == "equality") { return ConstraintKind::equality; }
  if (text == "l2-ball") { return ConstraintKind::l2_ball; }
  if (text == "dantzig") { return ConstraintKind::dantzig; }
  throw InvalidArgument("unknown constraint kind '" + std::string(text) + "'");
}

ConstraintSpec ConstraintSpec::equality(Vector y) {
  return {ConstraintKind::equality, std::move(y), 0.0, 0.0};
}

ConstraintSpec ConstraintSpec::l2_ball(Vector y, double epsilon) {
  return {ConstraintKind::l2_ball, std::move(y), epsilon, 0.0};
}

ConstraintSpec ConstraintSpec::dantzig(Vector y, double lambda) {
  return {ConstraintKind::dantzig, std::move(y), 0.0, lambda};
}

namespace {

void validate_raw(ConstraintSpec const &constraint, Matrix const &phi) {
  if (constraint.y.size() != phi.rows()) {
    throw InvalidArgument("constraint: y has length " + std::to_string(constraint.y.size()) +
                          ", expected m=" + std::to_string(phi.rows()));
  }
  if (!constraint.y.allFinite()) { throw InvalidArgument("constraint: y has non-finite entries"); }
  switch (constraint.kind) {
  case ConstraintKind::equality:
    break;
  case ConstraintKind::l2_ball:
    if (!(constraint.epsilon > 0.0)) { throw InvalidArgument("constraint: l2-ball requires epsilon > 0"); }
    break;
  case ConstraintKind::dantzig:
    if (!(constraint.lambda >= 0.0) || !std::isfinite(constraint.lambda)) {
      throw InvalidArgument("constraint: dantzig requires finite lambda >= 0");
    }
    break;
  }
}

double l1(Vector const &v) { return v.lpNorm<1>(); }

struct CoreResult {
  Vector x;
  long iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double feasibility = 0.0;
  bool converged = false;
};

double operator_norm(Matrix const &analysis, Matrix const &sensing, int steps) {
  Index const n = analysis.cols();
  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  // Deterministic start with a tilt so it is not orthogonal to the top singular vector by symmetry.
  for (Index i = 0; i < n; ++i) { v(i) += 1e-3 * static_cast<double>(i + 1); }
  v.normalize();
  double norm_sq = 0.0;
  for (int s = 0; s < steps; ++s) {
    Vector w = analysis.transpose() * (analysis * v) + sensing.transpose() * (sensing * v);
    norm_sq = w.norm();
    if (norm_sq == 0.0) { return 0.0; }
    v = w / norm_sq;
  }
  return std::sqrt(norm_sq);
}

// Projection of v onto the ball {w : ||w - center|| <= radius}.
Vector project_ball(Vector const &v, Vector const &center, double radius) {
  Vector d = v - center;
  double const n = d.norm();
  if (n <= radius) { return v; }
  return center + d * (radius / n);
}

/**
 * Chambolle-Pock iteration for min ||A x||_1 + indicator_B(S x):
 *
 *   x+   = x - tau K^T xi
 *   xbar = 2 x+ - x
 *   xi+  = prox_{sigma F*}(xi + sigma K xbar),   K = [A; S].
 *
 * The dual block for A is clamped to [-1, 1]; the block for S uses Moreau's
 * identity with the projection onto B.
 */
CoreResult chambolle_pock(Matrix const &analysis, Matrix const &sensing, ConstraintSpec const &constraint,
                          SolverOptions const &options) {
  Index const n = analysis.cols();
  Index const p = analysis.rows();
  Index const m = sensing.rows();
  Vector const &y = constraint.y;

  double const norm = operator_norm(analysis, sensing, options.power_iterations);
  // 1% headroom over the power-iteration estimate keeps tau*sigma*L^2 < 1.
  double const step = 1.0 / (1.01 * std::max(norm, 1e-300));
  double const tau = step;
  double const sigma = step;

  Vector x = Vector::Zero(n);
  Vector u = Vector::Zero(p);
  Vector w = Vector::Zero(m);
  Vector kt = Vector::Zero(n); // K^T xi for the current dual
  double const ynorm = y.norm();

  CoreResult best;
  best.x = x;
  double best_score = std::numeric_limits<double>::infinity();

  for (long it = 1; it <= options.max_iters; ++it) {
    Vector const x_new = x - tau * kt;
    Vector const xbar = 2.0 * x_new - x;

    Vector u_new = (u + sigma * (analysis * xbar)).cwiseMax(-1.0).cwiseMin(1.0);
    Vector const wv = w + sigma * (sensing * xbar);
    Vector w_new;
    if (constraint.kind == ConstraintKind::equality) {
      w_new = wv - sigma * y;
    } else {
      w_new = wv - sigma * project_ball(wv / sigma, y, constraint.epsilon);
    }
    Vector const kt_new = analysis.transpose() * u_new + sensing.transpose() * w_new;

    // Residuals of the fixed-point map (subgradient form).
    Vector const dx = x - x_new;
    Vector const primal = dx / tau - (kt - kt_new);
    Vector const ax_diff = analysis * dx;
    Vector const sx_diff = sensing * dx;
    double const dual_sq = ((u - u_new) / sigma - ax_diff).squaredNorm() + ((w - w_new) / sigma - sx_diff).squaredNorm();

    x = x_new;
    u = std::move(u_new);
    w = std::move(w_new);
    kt = kt_new;

    Vector const ax = analysis * x;
    Vector const sx = sensing * x;
    double const pscale = 1.0 + (analysis.transpose() * u).norm() + (sensing.transpose() * w).norm();
    double const dscale = 1.0 + std::sqrt(ax.squaredNorm() + sx.squaredNorm()) + ynorm;
    double const pres = primal.norm() / pscale;
    double const dres = std::sqrt(dual_sq) / dscale;
    double const feas = constraint_violation(sensing, constraint, x) / (1.0 + ynorm);

    double const score = std::max({pres, dres, feas});
    if (score < best_score) {
      best_score = score;
      best.x = x;
      best.iterations = it;
      best.primal_residual = pres;
      best.dual_residual = dres;
      best.feasibility = feas;
    }
    if (score <= options.tol) {
      best.converged = true;
      best.iterations = it;
      return best;
    }
  }
  best.iterations = options.max_iters;
  return best;
}

// Projects x onto {z : (A z)_Z = 0, S z = y} for the near-zero pattern Z of A x
// and keeps the result when it preserves the sign pattern and does not raise
// the objective. Returns nullopt when no candidate qualifies.
std::optional<Vector> polish_equality(Matrix const &analysis, Matrix const &sensing, Vector const &y,
                                      Vector const &x) {
  Vector const v = analysis * x;
  double const scale = std::max(v.lpNorm<Eigen::Infinity>(), 1e-300);
  double const objective = l1(v);
  for (double rel : {1e-7, 1e-6, 1e-5, 1e-8, 1e-4}) {
    double const thr = rel * scale;
    std::vector<Index> zeros;
    for (Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) <= thr) { zeros.push_back(i); }
    }
    Index const nz = static_cast<Index>(zeros.size());
    Matrix c(nz + sensing.rows(), x.size());
    Vector d = Vector::Zero(nz + sensing.rows());
    for (Index i = 0; i < nz; ++i) { c.row(i) = analysis.row(zeros[static_cast<std::size_t>(i)]); }
    c.bottomRows(sensing.rows()) = sensing;
    d.tail(sensing.rows()) = y;

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(c);
    Vector const z = x - cod.solve(c * x - d);
    if ((c * z - d).norm() > 1e-11 * (1.0 + d.norm())) { continue; }
    if ((z - x).norm() > 1e-4 * (1.0 + x.norm())) { continue; }
    Vector const vz = analysis * z;
    bool signs_ok = true;
    for (Index i = 0; i < v.size() && signs_ok; ++i) {
      if (std::abs(v(i)) > thr) { signs_ok = (vz(i) > 0.0) == (v(i) > 0.0) && vz(i) != 0.0; }
    }
    if (!signs_ok) { continue; }
    if (l1(vz) > objective + 1e-8 * (1.0 + objective)) { continue; }
    return z;
  }
  return std::nullopt;
}

RecoveryResult solve_first_order(Matrix const &analysis, Matrix const &sensing,
                                 ConstraintSpec const &constraint, SolverOptions const &options) {
  validate_raw(constraint, sensing);
  if (constraint.kind == ConstraintKind::dantzig) {
    throw InvalidArgument("first-order path supports equality and l2-ball constraints; use "
                          "solve_lp_certified for the Dantzig selector");
  }
  Index const n = analysis.cols();
  Vector const &y = constraint.y;
  double const yscale = std::max(1.0, y.norm());

  RecoveryResult out;
  // Least-squares residual decides feasibility of B(y).
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sensing);
  double const ls_residual = (sensing * cod.solve(y) - y).norm();
  if (constraint.kind == ConstraintKind::equality && ls_residual > options.feas_tol * yscale) {
    throw Infeasible("equality constraint infeasible: y is not in range(Phi) (least-squares residual " +
                     format_double(ls_residual) + ")");
  }
  if (constraint.kind == ConstraintKind::l2_ball && ls_residual > constraint.epsilon) {
    throw Infeasible("l2-ball constraint infeasible: min ||Phi z - y|| = " + format_double(ls_residual) +
                     " > epsilon = " + format_double(constraint.epsilon));
  }
  if (constraint.kind == ConstraintKind::l2_ball && y.norm() <= constraint.epsilon) {
    // z = 0 is feasible and is the unique minimizer of ||Dz||_1 for full-rank D.
    out.x_hat = Vector::Zero(n);
    out.converged = true;
    out.diagnostic = "zero is feasible";
    return out;
  }

  CoreResult core = chambolle_pock(analysis, sensing, constraint, options);
  out.x_hat = core.x;
  out.iterations = core.iterations;
  out.primal_residual = std::max(core.primal_residual, core.feasibility);
  out.dual_residual = core.dual_residual;
  out.converged = core.converged;
  if (!core.converged) {
    out.diagnostic = "max_iters reached; returning best iterate";
  }
  if (options.polish && constraint.kind == ConstraintKind::equality) {
    if (auto z = polish_equality(analysis, sensing, y, core.x)) {
      out.x_hat = *z;
      out.polished = true;
      out.primal_residual = std::max(core.primal_residual, constraint_violation(sensing, constraint, *z) / (1.0 + y.norm()));
    }
  }
  out.objective = l1(analysis * out.x_hat);
  return out;
}

} // namespace

void validate(ConstraintSpec const &constraint, SensingMatrix const &phi) {
  validate_raw(constraint, phi.entries());
}

double constraint_violation(Matrix const &phi, ConstraintSpec const &constraint, Vector const &x) {
  Vector const r = phi * x - constraint.y;
  switch (constraint.kind) {
  case ConstraintKind::equality:
    return r.norm();
  case ConstraintKind::l2_ball:
    return std::max(0.0, r.norm() - constraint.epsilon);
  case ConstraintKind::dantzig:
    return std::max(0.0, (phi.transpose() * r).lpNorm<Eigen::Infinity>() - constraint.lambda);
  }
  return 0.0;
}

RecoveryResult solve_analysis_l1(SensingMatrix const &phi, Dictionary const &dictionary,
                                 ConstraintSpec const &constraint, SolverOptions const &options) {
  if (phi.cols() != dictionary.cols()) {
    throw InvalidArgument("solve_analysis_l1: Phi has " + std::to_string(phi.cols()) +
                          " columns, dictionary has n=" + std::to_string(dictionary.cols()));
  }
  RecoveryResult out = solve_first_order(dictionary.entries(), phi.entries(), constraint, options);
  if (options.certify) {
    if (constraint.kind != ConstraintKind::equality) {
      out.diagnostic += (out.diagnostic.empty() ? "" : "; ") + std::string("certification needs a polyhedral set");
    } else {
      try {
        RecoveryResult lp = solve_lp_certified(phi, dictionary, constraint, options.lp_max_variables);
        double const gap = std::abs(lp.objective - out.objective);
        out.certification_gap = gap;
        out.certified = gap <= options.cert_tol;
        out.unique_minimizer = lp.unique_minimizer;
      } catch (BudgetExceeded const &e) {
        out.diagnostic += (out.diagnostic.empty() ? "" : "; ") + std::string(e.what());
      }
    }
  }
  return out;
}

RecoveryResult solve_synthesis_l1(SensingMatrix const &phi, Matrix const &synthesis,
                                  ConstraintSpec const &constraint, SolverOptions const &options) {
  if (synthesis.rows() != phi.cols()) {
    throw InvalidArgument("solve_synthesis_l1: synthesis operator has " + std::to_string(synthesis.rows()) +
                          " rows, Phi has n=" + std::to_string(phi.cols()) + " columns");
  }
  Index const p = synthesis.cols();
  Matrix const composed = phi.entries() * synthesis;
  Matrix const identity = Matrix::Identity(p, p);
  RecoveryResult inner = solve_first_order(identity, composed, constraint, options);
  RecoveryResult out = inner;
  out.x_hat = synthesis * inner.x_hat;
  out.objective = l1(inner.x_hat);
  return out;
}

RecoveryResult solve_synthesis_l1(SensingMatrix const &phi, Dictionary const &analysis,
                                  ConstraintSpec const &constraint, SolverOptions const &options) {
  return solve_synthesis_l1(phi, Matrix(analysis.entries().transpose()), constraint, options);
}

RecoveryResult solve_lp_certified(SensingMatrix const &phi, Dictionary const &dictionary,
                                  ConstraintSpec const &constraint, long max_variables) {
  validate(constraint, phi);
  if (phi.cols() != dictionary.cols()) {
    throw InvalidArgument("solve_lp_certified: Phi and dictionary disagree on n");
  }
  if (constraint.kind == ConstraintKind::l2_ball) {
    throw InvalidArgument("solve_lp_certified: l2-ball is not polyhedral");
  }
  Index const n = dictionary.cols();
  Index const p = dictionary.rows();
  Index const m = phi.rows();
  Matrix const &d = dictionary.entries();
  Matrix const &f = phi.entries();
  bool const dantzig = constraint.kind == ConstraintKind::dantzig;

  // Columns: z+ (n) | z- (n) | t (p) | s1 (p) | s2 (p) [| s3 (n) | s4 (n)]
  Index const base = 2 * n + 3 * p;
  Index const vars = base + (dantzig ? 2 * n : 0);
  if (vars > max_variables) {
    throw BudgetExceeded("solve_lp_certified: " + std::to_string(vars) + " variables exceed the LP budget of " +
                         std::to_string(max_variables));
  }
  Index const rows = 2 * p + (dantzig ? 2 * n : m);
  Matrix a = Matrix::Zero(rows, vars);
  Vector b = Vector::Zero(rows);
  Vector c = Vector::Zero(vars);
  c.segment(2 * n, p).setOnes();

  Matrix const eye_p = Matrix::Identity(p, p);
  // Dz - t + s1 = 0
  a.block(0, 0, p, n) = d;
  a.block(0, n, p, n) = -d;
  a.block(0, 2 * n, p, p) = -eye_p;
  a.block(0, 2 * n + p, p, p) = eye_p;
  // -Dz - t + s2 = 0
  a.block(p, 0, p, n) = -d;
  a.block(p, n, p, n) = d;
  a.block(p, 2 * n, p, p) = -eye_p;
  a.block(p, 2 * n + 2 * p, p, p) = eye_p;
  if (!dantzig) {
    a.block(2 * p, 0, m, n) = f;
    a.block(2 * p, n, m, n) = -f;
    b.segment(2 * p, m) = constraint.y;
  } else {
    Matrix const g = f.transpose() * f;
    Vector const gy = f.transpose() * constraint.y;
    Matrix const eye_n = Matrix::Identity(n, n);
    // G z + s3 = lambda + Phi^T y ;  -G z + s4 = lambda - Phi^T y
    a.block(2 * p, 0, n, n) = g;
    a.block(2 * p, n, n, n) = -g;
    a.block(2 * p, base, n, n) = eye_n;
    b.segment(2 * p, n) = Vector::Constant(n, constraint.lambda) + gy;
    a.block(2 * p + n, 0, n, n) = -g;
    a.block(2 * p + n, n, n, n) = g;
    a.block(2 * p + n, base + n, n, n) = eye_n;
    b.segment(2 * p + n, n) = Vector::Constant(n, constraint.lambda) - gy;
  }

  lp::Result lp = lp::solve_standard_form(a, b, c);
  switch (lp.status) {
  case lp::Status::optimal:
    break;
  case lp::Status::infeasible:
    throw Infeasible("solve_lp_certified: LP infeasible");
  case lp::Status::unbounded:
    throw Unbounded("solve_lp_certified: LP unbounded");
  case lp::Status::pivot_limit:
    throw Error("solve_lp_certified: pivot limit reached");
  }

  RecoveryResult out;
  out.x_hat = lp.x.head(n) - lp.x.segment(n, n);
  out.objective = l1(d * out.x_hat);
  out.iterations = lp.pivots;
  out.primal_residual = constraint_violation(f, constraint, out.x_hat);
  out.dual_residual = std::abs(lp.objective - out.objective);
  out.converged = true;
  out.certified = true;

  // Unique primal optimum when every nonbasic reduced cost is strictly positive,
  // ignoring the mirror column of a basic split variable (z+_i vs z-_i).
  std::vector<bool> basic(static_cast<std::size_t>(vars), false);
  for (Index j : lp.basis) { basic[static_cast<std::size_t>(j)] = true; }
  bool unique = true;
  for (Index j = 0; j < vars && unique; ++j) {
    if (basic[static_cast<std::size_t>(j)]) { continue; }
    if (j < 2 * n) {
      Index const twin = j < n ? j + n : j - n;
      if (basic[static_cast<std::size_t>(twin)]) { continue; }
    }
    if (lp.reduced_costs(j) <= 1e-9) { unique = false; }
  }
  out.unique_minimizer = unique;
  return out;
}

} // namespace cosparse
