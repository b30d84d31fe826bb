#include "cosparse/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cosparse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuotientZero = 1e-14;

void require_constants(VerifyConstants const &c) {
  if (std::isnan(c.delta2k) || std::isnan(c.rho)) {
    throw InvalidArgument("bound check: missing constants (delta2k and rho are required)");
  }
  if (c.delta2k < 0.0 || c.rho < 0.0) { throw InvalidArgument("bound check: constants must be nonnegative"); }
}

void require_shapes(SensingMatrix const &phi, Dictionary const &dictionary, Index k) {
  if (phi.cols() != dictionary.cols()) {
    throw InvalidArgument("bound check: Phi and dictionary disagree on n");
  }
  if (k < 1) { throw InvalidArgument("bound check: k must be >= 1"); }
}

// bound_constants for delta < 1; otherwise a record with alpha, beta, C0, C1 at +inf.
BoundConstants constants_or_vacuous(double delta2k, double rho) {
  if (delta2k < 1.0) { return bound_constants(delta2k, rho); }
  BoundConstants out;
  out.delta2k = delta2k;
  out.rho = rho;
  out.alpha = out.beta = out.c0 = out.c1 = kInf;
  out.printed_c0 = printed_c0(delta2k);
  out.printed_c1 = printed_c1(delta2k);
  out.admissible = false;
  return out;
}

BoundWitness witness_for(SensingMatrix const &phi, Dictionary const &dictionary, Index k) {
  BoundWitness w;
  w.m = phi.rows();
  w.n = dictionary.cols();
  w.p = dictionary.rows();
  w.k = k;
  return w;
}

void finish(BoundReport &r) { r.slack = r.rhs - r.lhs; }

// |<Phi h_L, Phi h>| / ||(Dh)_L||, with the 0/0 convention. Sets `degenerate`
// and returns +inf when the denominator vanishes under a nonzero numerator.
double inner_quotient(double inner, double denom, bool &degenerate) {
  if (denom > 0.0) { return inner / denom; }
  if (inner <= kQuotientZero) { return 0.0; }
  degenerate = true;
  return kInf;
}

} // namespace

std::string_view to_string(BoundKind kind) {
  switch (kind) {
  case BoundKind::corollary1:
    return "corollary1";
  case BoundKind::corollary2:
    return "corollary2";
  case BoundKind::theorem1:
    return "theorem1";
  }
  return "unknown";
}

double BoundReport::num_tol() const {
  double scale = 1.0;
  if (std::isfinite(lhs)) { scale = std::max(scale, std::abs(lhs)); }
  if (std::isfinite(rhs)) { scale = std::max(scale, std::abs(rhs)); }
  return 1e-8 * scale;
}

bool BoundReport::holds() const { return slack >= -num_tol(); }

VerifyConstants exact_constants(SensingMatrix const &phi, Dictionary const &dictionary, Index k,
                                EnumerationBudget const &budget) {
  Index const order = std::min<Index>(2 * k, dictionary.rows());
  VerifyConstants c;
  c.delta2k = delta_exact(phi, dictionary, order, SubspaceFamily::chunk_span, budget).delta;
  c.rho = rho_exact(dictionary, k, budget).rho;
  c.exact = true;
  return c;
}

BoundReport check_corollary1(SensingMatrix const &phi, Dictionary const &dictionary, Index k,
                             Chunk const &chunk_i, Chunk const &chunk_j, VerifyConstants const &constants) {
  require_shapes(phi, dictionary, k);
  require_constants(constants);
  Index const p = dictionary.rows();
  for (Chunk const *c : {&chunk_i, &chunk_j}) {
    if (c->support.ambient() != p) { throw InvalidArgument("corollary1: chunk support ambient size != p"); }
    if (c->support.size() > k) { throw InvalidArgument("corollary1: chunk support larger than k"); }
    if (c->h.size() != dictionary.cols()) { throw InvalidArgument("corollary1: chunk vector length != n"); }
  }
  if (!chunk_i.support.disjoint(chunk_j.support)) {
    throw InvalidArgument("corollary1: overlapping supports {" + chunk_i.support.to_string() + "} and {" +
                          chunk_j.support.to_string() + "}");
  }

  BoundReport r;
  r.which = BoundKind::corollary1;
  r.constants = constants_or_vacuous(constants.delta2k, constants.rho);
  r.hypothesis_ok = constants.exact;
  r.witness = witness_for(phi, dictionary, k);
  r.witness.supports = {chunk_i.support, chunk_j.support};

  double const norm_i = dictionary.apply(chunk_i.h).norm();
  double const norm_j = dictionary.apply(chunk_j.h).norm();
  r.lhs = std::abs(phi.apply(chunk_i.h).dot(phi.apply(chunk_j.h)));
  r.rhs = (constants.delta2k + constants.rho) * norm_i * norm_j;
  r.aux["norm_dh_i"] = norm_i;
  r.aux["norm_dh_j"] = norm_j;
  if (norm_i > 0.0 && norm_j > 0.0) {
    r.aux["cosine_dh"] = dictionary.apply(chunk_i.h).dot(dictionary.apply(chunk_j.h)) / (norm_i * norm_j);
  }
  finish(r);
  return r;
}

BoundReport check_corollary2(SensingMatrix const &phi, Dictionary const &dictionary, Index k, Vector const &h,
                             SupportSet const &lambda0, VerifyConstants const &constants) {
  require_shapes(phi, dictionary, k);
  require_constants(constants);
  ChunkDecomposition const cd = chunk_decompose(h, dictionary, k, lambda0);

  BoundReport r;
  r.which = BoundKind::corollary2;
  r.constants = constants_or_vacuous(constants.delta2k, constants.rho);
  r.witness = witness_for(phi, dictionary, k);

  SupportSet lambda = cd.chunks[0].support;
  if (cd.chunks.size() > 1) { lambda = lambda.united(cd.chunks[1].support); }
  r.witness.supports = {cd.chunks[0].support, lambda};

  Vector const &v = cd.analysis;
  Vector const v_lambda = mask(v, lambda);
  Vector const h_lambda = dictionary.pseudo_inverse() * v_lambda;
  double const inner = std::abs(phi.apply(h_lambda).dot(phi.apply(h)));
  double const tail = mask(v, lambda0.complement()).lpNorm<1>();
  double const sqrt_k = std::sqrt(static_cast<double>(k));

  r.lhs = v_lambda.norm();
  double const quotient = inner_quotient(inner, r.lhs, r.degenerate);
  double const alpha_term = r.constants.alpha * tail / sqrt_k;
  double const beta_term = quotient == 0.0 ? 0.0 : r.constants.beta * quotient;
  r.rhs = alpha_term + beta_term;

  bool const residual_ok = cd.residual_norm <= 1e-8 * h.norm();
  r.hypothesis_ok = constants.exact && constants.delta2k < 1.0 && residual_ok;

  // Auxiliary inequalities used inside the argument, reported in the
  // coordinate-mask reading for Dh.
  double pair_sum = mask(v, cd.chunks[0].support).norm();
  if (cd.chunks.size() > 1) { pair_sum += mask(v, cd.chunks[1].support).norm(); }
  double tail_sum = 0.0;
  for (std::size_t j = 2; j < cd.chunks.size(); ++j) { tail_sum += mask(v, cd.chunks[j].support).norm(); }
  r.aux["alpha_term"] = alpha_term;
  r.aux["beta_term"] = beta_term;
  r.aux["inner"] = inner;
  r.aux["tail_l1"] = tail;
  r.aux["lhs_chunk_reading"] = dictionary.apply(h_lambda).norm();
  r.aux["pair_norm_sum"] = pair_sum;
  r.aux["pair_norm_bound"] = std::sqrt(2.0) * r.lhs;
  r.aux["tail_chunk_sum"] = tail_sum;
  r.aux["tail_chunk_bound"] = tail / sqrt_k;
  r.aux["residual_norm"] = cd.residual_norm;
  finish(r);
  return r;
}

BoundReport check_theorem1(SensingMatrix const &phi, Dictionary const &dictionary, Index k, Vector const &x,
                           Vector const &x_hat, VerifyConstants const &constants, RhoMode mode) {
  require_shapes(phi, dictionary, k);
  require_constants(constants);
  if (x.size() != dictionary.cols() || x_hat.size() != dictionary.cols()) {
    throw InvalidArgument("theorem1: x and x_hat must have length n");
  }
  if (constants.delta2k >= 1.0) {
    throw InadmissibleConstants("theorem1: delta2k=" + format_double(constants.delta2k) + " >= 1");
  }
  double const rho_used = mode == RhoMode::printed ? 0.0 : constants.rho;
  BoundConstants const bc = bound_constants(constants.delta2k, rho_used);
  if (!bc.admissible) {
    throw InadmissibleConstants("theorem1: alpha=" + format_double(bc.alpha) + " >= 1 (delta2k=" +
                                format_double(constants.delta2k) + ", rho=" + format_double(rho_used) + ")");
  }

  BoundReport r;
  r.which = BoundKind::theorem1;
  r.constants = bc;
  r.witness = witness_for(phi, dictionary, k);

  Vector const dx = dictionary.apply(x);
  double const l1_hat = dictionary.apply(x_hat).lpNorm<1>();
  double const l1_true = dx.lpNorm<1>();
  bool const hypothesis = l1_hat <= l1_true + 1e-8 * std::max(1.0, l1_true);
  r.hypothesis_ok = hypothesis && constants.exact;

  SupportSet const lambda0 = top_k_support(dx, k);
  double const sigma = sigma_k(x, dictionary, k);
  double const term1 = bc.c0 * sigma / std::sqrt(static_cast<double>(k));

  Vector const h = x_hat - x;
  double term2 = 0.0;
  double inner = 0.0;
  SupportSet lambda = lambda0;
  if (!h.isZero(0.0)) {
    ChunkDecomposition const cd = chunk_decompose(h, dictionary, k, lambda0);
    if (cd.chunks.size() > 1) { lambda = lambda.united(cd.chunks[1].support); }
    Vector const v_lambda = mask(cd.analysis, lambda);
    Vector const h_lambda = dictionary.pseudo_inverse() * v_lambda;
    inner = std::abs(phi.apply(h_lambda).dot(phi.apply(h)));
    double const quotient = inner_quotient(inner, v_lambda.norm(), r.degenerate);
    term2 = quotient == 0.0 ? 0.0 : bc.c1 * quotient;
    r.aux["residual_norm"] = cd.residual_norm;
  }
  r.witness.supports = {lambda0, lambda};
  r.lhs = dictionary.apply(h).norm();
  r.rhs = term1 + term2;

  r.aux["sigma_k"] = sigma;
  r.aux["term1"] = term1;
  r.aux["term2"] = term2;
  r.aux["inner"] = inner;
  r.aux["phi_h_norm"] = phi.apply(h).norm();
  r.aux["l1_hat"] = l1_hat;
  r.aux["l1_true"] = l1_true;
  r.aux["printed_c0"] = bc.printed_c0;
  r.aux["printed_c1"] = bc.printed_c1;
  if (mode == RhoMode::printed) {
    // Constants the exact rho would have produced, to expose the gap.
    BoundConstants const with_rho = bound_constants(constants.delta2k, constants.rho);
    r.aux["c0_with_rho"] = with_rho.c0;
    r.aux["c1_with_rho"] = with_rho.c1;
  }
  finish(r);
  return r;
}

} // namespace cosparse
