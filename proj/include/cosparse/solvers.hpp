#pragma once

#include "cosparse/model_core.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace cosparse {

enum class ConstraintKind { equality, l2_ball, dantzig };

std::string_view to_string(ConstraintKind kind);
ConstraintKind parse_constraint_kind(std::string_view text);

/// Feasible set B(y): {Phi z = y}, {||Phi z - y||_2 <= epsilon} or
/// {||Phi^T (Phi z - y)||_inf <= lambda}.
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::equality;
  Vector y;
  double epsilon = 0.0;
  double lambda = 0.0;

  static ConstraintSpec equality(Vector y);
  static ConstraintSpec l2_ball(Vector y, double epsilon);
  static ConstraintSpec dantzig(Vector y, double lambda);
};

/// Throws InvalidArgument when the spec is inconsistent with itself or with phi.
void validate(ConstraintSpec const &constraint, SensingMatrix const &phi);

/// Amount by which x violates the constraint (0 when inside).
double constraint_violation(Matrix const &phi, ConstraintSpec const &constraint, Vector const &x);

struct SolverOptions {
  /// Relative stopping tolerance on the primal/dual residuals.
  double tol = 1e-9;
  long max_iters = 200000;
  int power_iterations = 100;
  /// Snap equality-constrained solutions onto the affine face identified by
  /// the first-order iterate.
  bool polish = true;
  /// Also run the LP path (equality only) and compare objectives.
  bool certify = false;
  double cert_tol = 1e-6;
  double feas_tol = 1e-7;
  long lp_max_variables = 400;
};

struct RecoveryResult {
  Vector x_hat;
  double objective = 0.0;
  long iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  bool certified = false;
  std::optional<double> certification_gap;
  bool polished = false;
  /// LP path only: optimal basis is dual nondegenerate, so the minimizer is unique.
  std::optional<bool> unique_minimizer;
  std::string diagnostic;
};

/// min ||D z||_1 over z in B(y) by primal-dual splitting (equality and l2-ball).
RecoveryResult solve_analysis_l1(SensingMatrix const &phi, Dictionary const &dictionary,
                                 ConstraintSpec const &constraint, SolverOptions const &options = {});

/// min ||a||_1 over Phi D_s a in B(y); x_hat = D_s a_hat. `synthesis` is n x p.
RecoveryResult solve_synthesis_l1(SensingMatrix const &phi, Matrix const &synthesis,
                                  ConstraintSpec const &constraint, SolverOptions const &options = {});

/// Synthesis program with D_s = D^T.
RecoveryResult solve_synthesis_l1(SensingMatrix const &phi, Dictionary const &analysis,
                                  ConstraintSpec const &constraint, SolverOptions const &options = {});

/// Dense simplex on min sum t s.t. -t <= Dz <= t, z in B(y) (equality or dantzig).
RecoveryResult solve_lp_certified(SensingMatrix const &phi, Dictionary const &dictionary,
                                  ConstraintSpec const &constraint, long max_variables = 400);

} // namespace cosparse
