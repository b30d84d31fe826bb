#pragma once

#include "cosparse/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cosparse {

enum class DictionaryKind {
  identity,
  orthogonal,
  tight_frame,
  finite_difference,
  gaussian_random,
  user_supplied,
};

enum class SensingKind { gaussian, bernoulli, partial_orthogonal, user_supplied };

std::string_view to_string(DictionaryKind kind);
std::string_view to_string(SensingKind kind);
DictionaryKind parse_dictionary_kind(std::string_view text);
SensingKind parse_sensing_kind(std::string_view text);

/**
 * Analysis operator D (p x n, p >= n) with full column rank.
 *
 * The pseudo-inverse and the orthogonal projector onto range(D) are computed
 * once at construction; the object is immutable afterwards.
 */
class Dictionary {
public:
  Dictionary(Matrix entries, DictionaryKind kind = DictionaryKind::user_supplied);

  Index rows() const { return d_.rows(); }
  Index cols() const { return d_.cols(); }
  DictionaryKind kind() const { return kind_; }
  Matrix const &entries() const { return d_; }

  /// D^+ (n x p). Left inverse because D has full column rank.
  Matrix const &pseudo_inverse() const { return pinv_; }
  /// D D^+ (p x p), the orthogonal projector onto range(D).
  Matrix const &range_projector() const { return projector_; }

  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }

  Vector apply(Vector const &x) const;

private:
  Matrix d_;
  Matrix pinv_;
  Matrix projector_;
  DictionaryKind kind_;
  double sigma_min_ = 0.0;
  double sigma_max_ = 0.0;
};

/// Measurement matrix Phi (m x n). Undersampled (m < n) in normal use; m == n
/// is accepted so that phase sweeps can include the fully sampled end point.
class SensingMatrix {
public:
  SensingMatrix(Matrix entries, SensingKind kind = SensingKind::user_supplied);

  Index rows() const { return phi_.rows(); }
  Index cols() const { return phi_.cols(); }
  SensingKind kind() const { return kind_; }
  Matrix const &entries() const { return phi_; }
  bool undersampled() const { return phi_.rows() < phi_.cols(); }

  Vector apply(Vector const &x) const { return phi_ * x; }

private:
  Matrix phi_;
  SensingKind kind_;
};

/// Sorted, duplicate-free subset of {0, ..., p-1}.
class SupportSet {
public:
  SupportSet() = default;
  explicit SupportSet(Index ambient) : p_(ambient) {}
  SupportSet(std::vector<Index> indices, Index ambient);

  static SupportSet all(Index ambient);

  Index ambient() const { return p_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  std::vector<Index> const &indices() const { return indices_; }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }

  bool contains(Index i) const;
  bool disjoint(SupportSet const &other) const;
  SupportSet complement() const;
  SupportSet united(SupportSet const &other) const;

  /// Semicolon separated indices, e.g. "0;3;7" (empty string for the empty set).
  std::string to_string() const;

  friend bool operator==(SupportSet const &, SupportSet const &) = default;

private:
  std::vector<Index> indices_;
  Index p_ = 0;
};

/// v restricted to `support` (zero elsewhere).
Vector mask(Vector const &v, SupportSet const &support);

/// The k largest-magnitude positions of v. Ties keep the lower index.
SupportSet top_k_support(Vector const &v, Index k);

/// {i : |v_i| > tau}.
SupportSet thresholded_support(Vector const &v, double tau = kSupportThreshold);

struct Chunk {
  SupportSet support;
  /// h_j = D^+ ((Dh) masked to support).
  Vector h;
};

struct ChunkDecomposition {
  /// chunks[0] is Lambda_0; chunks[1..] follow by nonincreasing |Dh|.
  std::vector<Chunk> chunks;
  double residual_norm = 0.0;
  Vector source_h;
  /// Dh, kept for the magnitude bookkeeping done by the bound checkers.
  Vector analysis;
};

Dictionary make_dictionary(DictionaryKind kind, Index p, Index n, std::uint64_t seed);

SensingMatrix make_sensing_matrix(SensingKind kind, Index m, Index n, std::uint64_t seed);

/// Phi = A D with A drawn as make_sensing_matrix(kind, m, p, seed). The generalized
/// isometry of Phi relative to D then reduces to the plain isometry of A on range(D).
SensingMatrix make_adapted_sensing(SensingKind kind, Index m, Dictionary const &dictionary,
                                   std::uint64_t seed);

/// Unit-norm x with ||Dx||_0 <= k drawn from a uniformly chosen cosupport.
Vector sample_cosparse_signal(Dictionary const &dictionary, Index k, std::uint64_t seed);

/// Unit-norm x = D^+ v where v has power-law magnitudes |v|_(i) ~ i^-decay with
/// random signs and positions. Dx is compressible but not exactly cosparse.
Vector sample_compressible_signal(Dictionary const &dictionary, double decay, std::uint64_t seed);

/// l1 norm of Dx outside its k largest-magnitude entries.
double sigma_k(Vector const &x, Dictionary const &dictionary, Index k);

ChunkDecomposition chunk_decompose(Vector const &h, Dictionary const &dictionary, Index k,
                                   SupportSet const &lambda0);

// CSV layout: "# rows=<r> cols=<c> kind=<kind>" header, then one row per line,
// comma separated, 17 significant digits.
struct CsvMatrix {
  Matrix entries;
  std::string kind;
};

void write_matrix_csv(std::ostream &out, Matrix const &m, std::string_view kind);
CsvMatrix read_matrix_csv(std::istream &in);

void save_dictionary(std::string const &path, Dictionary const &dictionary);
Dictionary load_dictionary(std::string const &path);
void save_sensing_matrix(std::string const &path, SensingMatrix const &phi);
SensingMatrix load_sensing_matrix(std::string const &path);

} // namespace cosparse
