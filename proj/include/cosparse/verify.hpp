#pragma once

#include "cosparse/grip.hpp"

#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cosparse {

/// Recovery-bound constants with alpha >= 1 (the bound is vacuous).
class InadmissibleConstants : public Error {
public:
  using Error::Error;
};

enum class BoundKind { corollary1, corollary2, theorem1 };

std::string_view to_string(BoundKind kind);

/// Constants fed to the checkers. NaN marks a missing value.
struct VerifyConstants {
  double delta2k = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  /// True when both were computed by exhaustive enumeration (or are certified upper bounds).
  bool exact = false;
};

/// Exact delta_2k over the chunk-span family and exact rho_k for (phi, D, k).
VerifyConstants exact_constants(SensingMatrix const &phi, Dictionary const &dictionary, Index k,
                                EnumerationBudget const &budget = {});

/// How the recovery-bound constants treat rho.
enum class RhoMode {
  /// alpha uses the supplied rho.
  exact,
  /// rho forced to 0, giving the rho-free closed forms of C0 and C1.
  printed,
};

struct BoundWitness {
  Index m = 0;
  Index n = 0;
  Index p = 0;
  Index k = 0;
  std::vector<SupportSet> supports;
};

struct BoundReport {
  BoundKind which = BoundKind::corollary1;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  BoundConstants constants;
  bool hypothesis_ok = false;
  /// The inner-product quotient was 0/0-like with a nonzero numerator.
  bool degenerate = false;
  BoundWitness witness;
  /// Named auxiliary quantities (individual terms, intermediate bounds).
  std::map<std::string, double> aux;

  /// 1e-8 * max(|lhs|, |rhs|, 1).
  double num_tol() const;
  /// slack >= -num_tol().
  bool holds() const;
};

/// |<Phi h_i, Phi h_j>| <= (delta_2k + rho_k) ||D h_i|| ||D h_j||.
BoundReport check_corollary1(SensingMatrix const &phi, Dictionary const &dictionary, Index k,
                             Chunk const &chunk_i, Chunk const &chunk_j, VerifyConstants const &constants);

/// ||(Dh)_L||_2 <= alpha ||(Dh)_{L0^c}||_1 / sqrt(k) + beta |<Phi h_L, Phi h>| / ||(Dh)_L||_2
/// with L = L0 u L1 from chunk_decompose(h, D, k, lambda0).
BoundReport check_corollary2(SensingMatrix const &phi, Dictionary const &dictionary, Index k, Vector const &h,
                             SupportSet const &lambda0, VerifyConstants const &constants);

/// ||Dh||_2 <= C0 sigma_k(x) / sqrt(k) + C1 |<Phi h_L, Phi h>| / ||(Dh)_L||_2 with h = x_hat - x.
BoundReport check_theorem1(SensingMatrix const &phi, Dictionary const &dictionary, Index k, Vector const &x,
                           Vector const &x_hat, VerifyConstants const &constants, RhoMode mode = RhoMode::exact);

} // namespace cosparse
