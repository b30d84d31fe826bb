#include "cosparse/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cosparse {

namespace {

struct KindName {
  DictionaryKind kind;
  std::string_view name;
};

constexpr KindName kDictionaryNames[] = {
    {DictionaryKind::identity, "identity"},
    {DictionaryKind::orthogonal, "orthogonal"},
    {DictionaryKind::tight_frame, "tight-frame"},
    {DictionaryKind::finite_difference, "finite-difference"},
    {DictionaryKind::gaussian_random, "gaussian-random"},
    {DictionaryKind::user_supplied, "user-supplied"},
};

struct SensingName {
  SensingKind kind;
  std::string_view name;
};

constexpr SensingName kSensingNames[] = {
    {SensingKind::gaussian, "gaussian"},
    {SensingKind::bernoulli, "bernoulli"},
    {SensingKind::partial_orthogonal, "partial-orthogonal"},
    {SensingKind::user_supplied, "user-supplied"},
};

std::string shape(Index r, Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

// Uniformly random subset of {0..p-1} of the given size, sorted.
std::vector<Index> random_subset(Index p, Index size, Rng &rng) {
  std::vector<Index> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), Index{0});
  for (Index i = 0; i < size; ++i) {
    std::uniform_int_distribution<Index> pick(i, p - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(size));
  std::sort(all.begin(), all.end());
  return all;
}

Matrix finite_difference_operator(Index n) {
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    d(i, i) = -1.0;
    d(i, i + 1) = 1.0;
  }
  d.row(n - 1).setConstant(1.0 / static_cast<double>(n));
  return d;
}

Matrix generate_dictionary_entries(DictionaryKind kind, Index p, Index n, Rng &rng) {
  switch (kind) {
  case DictionaryKind::identity:
    return Matrix::Identity(n, n);
  case DictionaryKind::orthogonal: {
    Matrix g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(n, n);
  }
  case DictionaryKind::tight_frame: {
    Matrix g = gaussian_matrix(p, n, rng);
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeThinU);
    return svd.matrixU();
  }
  case DictionaryKind::finite_difference:
    return finite_difference_operator(n);
  case DictionaryKind::gaussian_random:
    return gaussian_matrix(p, n, rng) / std::sqrt(static_cast<double>(p));
  case DictionaryKind::user_supplied:
    break;
  }
  throw InvalidArgument("make_dictionary: kind user-supplied cannot be generated");
}

} // namespace

std::string_view to_string(DictionaryKind kind) {
  for (auto const &e : kDictionaryNames) {
    if (e.kind == kind) { return e.name; }
  }
  return "unknown";
}

std::string_view to_string(SensingKind kind) {
  for (auto const &e : kSensingNames) {
    if (e.kind == kind) { return e.name; }
  }
  return "unknown";
}

DictionaryKind parse_dictionary_kind(std::string_view text) {
  for (auto const &e : kDictionaryNames) {
    if (e.name == text) { return e.kind; }
  }
  throw InvalidArgument("unknown dictionary kind '" + std::string(text) + "'");
}

SensingKind parse_sensing_kind(std::string_view text) {
  for (auto const &e : kSensingNames) {
    if (e.name == text) { return e.kind; }
  }
  throw InvalidArgument("unknown matrix kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Dictionary

Dictionary::Dictionary(Matrix entries, DictionaryKind kind) : d_(std::move(entries)), kind_(kind) {
  Index const p = d_.rows();
  Index const n = d_.cols();
  if (n < 1 || p < n) {
    throw InvalidArgument("dictionary must be p x n with p >= n >= 1, got " + shape(p, n));
  }
  if (!d_.allFinite()) { throw InvalidArgument("dictionary has non-finite entries"); }

  Eigen::JacobiSVD<Matrix> svd(d_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  auto const &s = svd.singularValues();
  sigma_max_ = s(0);
  sigma_min_ = s(n - 1);
  if (!(sigma_max_ > 0.0) || sigma_min_ <= kRankTolerance * sigma_max_) {
    throw RankDeficient("dictionary " + shape(p, n) + " is not full column rank (sigma_min=" +
                        format_double(sigma_min_) + ", sigma_max=" + format_double(sigma_max_) +
                        ")");
  }

  switch (kind_) {
  case DictionaryKind::identity:
    if (p != n || d_ != Matrix::Identity(n, n)) {
      throw InvalidArgument("dictionary of kind identity must equal the identity");
    }
    break;
  case DictionaryKind::orthogonal:
  case DictionaryKind::finite_difference:
    if (p != n) {
      throw InvalidArgument("dictionary of kind " + std::string(to_string(kind_)) +
                            " must be square, got " + shape(p, n));
    }
    break;
  case DictionaryKind::tight_frame: {
    double const err = (d_.transpose() * d_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (err > 1e-10) {
      throw InvalidArgument("tight-frame dictionary violates D^T D = I (max error " +
                            format_double(err) + ")");
    }
    break;
  }
  default:
    break;
  }

  if (kind_ == DictionaryKind::identity) {
    pinv_ = Matrix::Identity(n, n);
  } else {
    pinv_ = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  }
  // range(D) is all of R^p for square D; keep the projector exact there.
  if (p == n) {
    projector_ = Matrix::Identity(p, p);
  } else {
    projector_ = svd.matrixU() * svd.matrixU().transpose();
  }
}

Vector Dictionary::apply(Vector const &x) const {
  if (x.size() != cols()) {
    throw InvalidArgument("dictionary apply: vector length " + std::to_string(x.size()) +
                          " != n=" + std::to_string(cols()));
  }
  return d_ * x;
}

// ---------------------------------------------------------------------------
// SensingMatrix

SensingMatrix::SensingMatrix(Matrix entries, SensingKind kind) : phi_(std::move(entries)), kind_(kind) {
  Index const m = phi_.rows();
  Index const n = phi_.cols();
  if (m < 1 || n < 1 || m > n) {
    throw InvalidArgument("sensing matrix must be m x n with 1 <= m <= n, got " + shape(m, n));
  }
  if (!phi_.allFinite()) { throw InvalidArgument("sensing matrix has non-finite entries"); }
  if (kind_ == SensingKind::bernoulli) {
    double const scale = 1.0 / std::sqrt(static_cast<double>(m));
    if ((phi_.cwiseAbs().array() - scale).abs().maxCoeff() > 1e-12) {
      throw InvalidArgument("bernoulli sensing matrix entries must be +-1/sqrt(m)");
    }
  }
}

// ---------------------------------------------------------------------------
// SupportSet

SupportSet::SupportSet(std::vector<Index> indices, Index ambient) : indices_(std::move(indices)), p_(ambient) {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= p_) {
      throw InvalidArgument("support index " + std::to_string(indices_[i]) + " outside [0, " +
                            std::to_string(p_) + ")");
    }
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw InvalidArgument("support indices must be strictly increasing");
    }
  }
}

SupportSet SupportSet::all(Index ambient) {
  std::vector<Index> idx(static_cast<std::size_t>(ambient));
  std::iota(idx.begin(), idx.end(), Index{0});
  return SupportSet(std::move(idx), ambient);
}

bool SupportSet::contains(Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

bool SupportSet::disjoint(SupportSet const &other) const {
  auto a = indices_.begin();
  auto b = other.indices_.begin();
  while (a != indices_.end() && b != other.indices_.end()) {
    if (*a == *b) { return false; }
    if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  return true;
}

SupportSet SupportSet::complement() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(p_ - size()));
  for (Index i = 0; i < p_; ++i) {
    if (!contains(i)) { out.push_back(i); }
  }
  return SupportSet(std::move(out), p_);
}

SupportSet SupportSet::united(SupportSet const &other) const {
  if (other.p_ != p_) { throw InvalidArgument("support union over different ambient sizes"); }
  std::vector<Index> out;
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(out));
  return SupportSet(std::move(out), p_);
}

std::string SupportSet::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) { s += ';'; }
    s += std::to_string(indices_[i]);
  }
  return s;
}

Vector mask(Vector const &v, SupportSet const &support) {
  if (support.ambient() != v.size()) {
    throw InvalidArgument("mask: support ambient size " + std::to_string(support.ambient()) +
                          " != vector length " + std::to_string(v.size()));
  }
  Vector out = Vector::Zero(v.size());
  for (Index i : support.indices()) { out(i) = v(i); }
  return out;
}

namespace {

// Indices of v ordered by decreasing magnitude; stable, so ties keep the lower index.
std::vector<Index> magnitude_order(Vector const &v, std::vector<Index> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&v](Index a, Index b) { return std::abs(v(a)) > std::abs(v(b)); });
  return candidates;
}

} // namespace

SupportSet top_k_support(Vector const &v, Index k) {
  if (k < 0) { throw InvalidArgument("top_k_support: negative k"); }
  std::vector<Index> all(static_cast<std::size_t>(v.size()));
  std::iota(all.begin(), all.end(), Index{0});
  auto order = magnitude_order(v, std::move(all));
  order.resize(static_cast<std::size_t>(std::min<Index>(k, v.size())));
  std::sort(order.begin(), order.end());
  return SupportSet(std::move(order), v.size());
}

SupportSet thresholded_support(Vector const &v, double tau) {
  std::vector<Index> idx;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tau) { idx.push_back(i); }
  }
  return SupportSet(std::move(idx), v.size());
}

// ---------------------------------------------------------------------------
// Generators

Dictionary make_dictionary(DictionaryKind kind, Index p, Index n, std::uint64_t seed) {
  if (n < 1 || p < n) {
    throw InvalidArgument("make_dictionary: need p >= n >= 1, got " + shape(p, n));
  }
  bool const square_only = kind == DictionaryKind::identity || kind == DictionaryKind::orthogonal ||
                           kind == DictionaryKind::finite_difference;
  if (square_only && p != n) {
    throw InvalidArgument("make_dictionary: kind " + std::string(to_string(kind)) +
                          " requires p == n, got " + shape(p, n));
  }
  constexpr int kAttempts = 4; // first draw plus three retries
  std::string last_error;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng(attempt == 0 ? seed : splitmix64(seed, static_cast<std::uint64_t>(attempt)));
    try {
      return Dictionary(generate_dictionary_entries(kind, p, n, rng), kind);
    } catch (RankDeficient const &e) {
      last_error = e.what();
    }
  }
  throw RankDeficient("make_dictionary: rank failure after retries: " + last_error);
}

SensingMatrix make_sensing_matrix(SensingKind kind, Index m, Index n, std::uint64_t seed) {
  if (m < 1 || m > n) {
    throw InvalidArgument("make_sensing_matrix: need 1 <= m <= n, got " + shape(m, n));
  }
  Rng rng(seed);
  double const scale = 1.0 / std::sqrt(static_cast<double>(m));
  switch (kind) {
  case SensingKind::gaussian:
    return SensingMatrix(gaussian_matrix(m, n, rng) * scale, kind);
  case SensingKind::bernoulli: {
    std::bernoulli_distribution coin(0.5);
    Matrix b(m, n);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < n; ++j) { b(i, j) = coin(rng) ? scale : -scale; }
    }
    return SensingMatrix(std::move(b), kind);
  }
  case SensingKind::partial_orthogonal: {
    // Rows: an orthonormal basis of the orthogonal complement of n-m random
    // sign vectors, scaled by sqrt(n/m). Flat removed directions keep every
    // coordinate subspace close to isometric.
    Index const removed = n - m;
    std::bernoulli_distribution coin(0.5);
    Matrix u(n, removed);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < removed; ++j) { u(i, j) = coin(rng) ? 1.0 : -1.0; }
    }
    Matrix stacked(n, n);
    stacked << u, gaussian_matrix(n, m, rng);
    Eigen::HouseholderQR<Matrix> qr(stacked);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    Matrix rows = q.rightCols(m).transpose();
    return SensingMatrix(rows * std::sqrt(static_cast<double>(n) / static_cast<double>(m)), kind);
  }
  case SensingKind::user_supplied:
    break;
  }
  throw InvalidArgument("make_sensing_matrix: kind user-supplied cannot be generated");
}

SensingMatrix make_adapted_sensing(SensingKind kind, Index m, Dictionary const &dictionary,
                                   std::uint64_t seed) {
  if (m > dictionary.cols()) {
    throw InvalidArgument("make_adapted_sensing: m=" + std::to_string(m) + " exceeds n=" +
                          std::to_string(dictionary.cols()));
  }
  SensingMatrix a = make_sensing_matrix(kind, m, dictionary.rows(), seed);
  return SensingMatrix(a.entries() * dictionary.entries(), SensingKind::user_supplied);
}

Vector sample_cosparse_signal(Dictionary const &dictionary, Index k, std::uint64_t seed) {
  Index const p = dictionary.rows();
  if (k < 1 || k >= p) {
    throw InvalidArgument("sample_cosparse_signal: need 1 <= k < p, got k=" + std::to_string(k) +
                          ", p=" + std::to_string(p));
  }
  Rng rng(seed);
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    auto cosupport = random_subset(p, p - k, rng);
    Matrix rows(static_cast<Index>(cosupport.size()), dictionary.cols());
    for (std::size_t i = 0; i < cosupport.size(); ++i) {
      rows.row(static_cast<Index>(i)) = dictionary.entries().row(cosupport[i]);
    }
    Matrix basis = orthonormal_null_space(rows);
    if (basis.cols() == 0) { continue; }
    Vector x = basis * gaussian_vector(basis.cols(), rng);
    double const norm = x.norm();
    if (norm == 0.0) { continue; }
    x /= norm;
    if (thresholded_support(dictionary.apply(x)).size() <= k) { return x; }
  }
  throw Infeasible("sample_cosparse_signal: infeasible cosparsity, every sampled cosupport of size " +
                   std::to_string(p - k) + " has a trivial null space (p=" + std::to_string(p) +
                   ", n=" + std::to_string(dictionary.cols()) + ", k=" + std::to_string(k) + ")");
}

Vector sample_compressible_signal(Dictionary const &dictionary, double decay, std::uint64_t seed) {
  if (!(decay > 0.0)) { throw InvalidArgument("sample_compressible_signal: decay must be > 0"); }
  Index const p = dictionary.rows();
  Rng rng(seed);
  auto positions = random_subset(p, p, rng);
  std::shuffle(positions.begin(), positions.end(), rng);
  std::bernoulli_distribution coin(0.5);
  Vector v(p);
  for (Index i = 0; i < p; ++i) {
    double const magnitude = std::pow(static_cast<double>(i + 1), -decay);
    v(positions[static_cast<std::size_t>(i)]) = coin(rng) ? magnitude : -magnitude;
  }
  Vector x = dictionary.pseudo_inverse() * v;
  return x / x.norm();
}

double sigma_k(Vector const &x, Dictionary const &dictionary, Index k) {
  if (k < 0) { throw InvalidArgument("sigma_k: negative k"); }
  Vector const dx = dictionary.apply(x);
  if (k >= dx.size()) { return 0.0; }
  SupportSet const head = top_k_support(dx, k);
  double tail = 0.0;
  for (Index i = 0; i < dx.size(); ++i) {
    if (!head.contains(i)) { tail += std::abs(dx(i)); }
  }
  return tail;
}

ChunkDecomposition chunk_decompose(Vector const &h, Dictionary const &dictionary, Index k,
                                   SupportSet const &lambda0) {
  Index const p = dictionary.rows();
  if (k < 1) { throw InvalidArgument("chunk_decompose: k must be >= 1"); }
  if (h.size() != dictionary.cols()) {
    throw InvalidArgument("chunk_decompose: h has length " + std::to_string(h.size()) +
                          ", expected n=" + std::to_string(dictionary.cols()));
  }
  if (h.isZero(0.0)) { throw InvalidArgument("chunk_decompose: h must be nonzero"); }
  if (lambda0.ambient() != p) { throw InvalidArgument("chunk_decompose: lambda0 ambient size != p"); }
  if (lambda0.size() > k) {
    throw InvalidArgument("chunk_decompose: |lambda0|=" + std::to_string(lambda0.size()) +
                          " exceeds k=" + std::to_string(k));
  }

  ChunkDecomposition out;
  out.source_h = h;
  out.analysis = dictionary.apply(h);
  Matrix const &pinv = dictionary.pseudo_inverse();

  auto make_chunk = [&](SupportSet support) {
    Vector h_j = pinv * mask(out.analysis, support);
    return Chunk{std::move(support), std::move(h_j)};
  };

  out.chunks.push_back(make_chunk(lambda0));
  auto rest = magnitude_order(out.analysis, lambda0.complement().indices());
  for (std::size_t start = 0; start < rest.size(); start += static_cast<std::size_t>(k)) {
    std::size_t const stop = std::min(rest.size(), start + static_cast<std::size_t>(k));
    std::vector<Index> idx(rest.begin() + static_cast<std::ptrdiff_t>(start),
                           rest.begin() + static_cast<std::ptrdiff_t>(stop));
    std::sort(idx.begin(), idx.end());
    out.chunks.push_back(make_chunk(SupportSet(std::move(idx), p)));
  }

  Vector sum = Vector::Zero(h.size());
  for (auto const &c : out.chunks) { sum += c.h; }
  out.residual_norm = (sum - h).norm();
  return out;
}

// ---------------------------------------------------------------------------
// CSV

void write_matrix_csv(std::ostream &out, Matrix const &m, std::string_view kind) {
  out << "# rows=" << m.rows() << " cols=" << m.cols() << " kind=" << kind << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) { out << ','; }
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

CsvMatrix read_matrix_csv(std::istream &in) {
  std::string header;
  if (!std::getline(in, header)) { throw InvalidArgument("matrix csv: missing header"); }
  long rows = -1;
  long cols = -1;
  std::string kind;
  {
    std::istringstream hs(header);
    std::string hash;
    hs >> hash;
    if (hash != "#") { throw InvalidArgument("matrix csv: header must start with '#'"); }
    std::string token;
    while (hs >> token) {
      auto eq = token.find('=');
      if (eq == std::string::npos) { throw InvalidArgument("matrix csv: bad header token '" + token + "'"); }
      std::string key = token.substr(0, eq);
      std::string value = token.substr(eq + 1);
      if (key == "rows") {
        rows = std::stol(value);
      } else if (key == "cols") {
        cols = std::stol(value);
      } else if (key == "kind") {
        kind = value;
      } else {
        throw InvalidArgument("matrix csv: unknown header key '" + key + "'");
      }
    }
  }
  if (rows < 1 || cols < 1 || kind.empty()) {
    throw InvalidArgument("matrix csv: header needs rows, cols and kind");
  }
  Matrix m(rows, cols);
  std::string line;
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw InvalidArgument("matrix csv: expected " + std::to_string(rows) + " rows, got " +
                            std::to_string(i));
    }
    std::istringstream ls(line);
    std::string cell;
    long j = 0;
    while (std::getline(ls, cell, ',')) {
      if (j >= cols) { throw InvalidArgument("matrix csv: too many columns in row " + std::to_string(i)); }
      char *end = nullptr;
      m(i, j) = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) { throw InvalidArgument("matrix csv: bad number '" + cell + "'"); }
      ++j;
    }
    if (j != cols) { throw InvalidArgument("matrix csv: row " + std::to_string(i) + " has wrong width"); }
  }
  return {std::move(m), std::move(kind)};
}

namespace {

void write_file(std::string const &path, Matrix const &m, std::string_view kind) {
  std::ofstream out(path);
  if (!out) { throw Error("cannot open '" + path + "' for writing"); }
  write_matrix_csv(out, m, kind);
  if (!out) { throw Error("write to '" + path + "' failed"); }
}

CsvMatrix read_file(std::string const &path) {
  std::ifstream in(path);
  if (!in) { throw Error("cannot open '" + path + "'"); }
  return read_matrix_csv(in);
}

} // namespace

void save_dictionary(std::string const &path, Dictionary const &dictionary) {
  write_file(path, dictionary.entries(), to_string(dictionary.kind()));
}

Dictionary load_dictionary(std::string const &path) {
  auto csv = read_file(path);
  return Dictionary(std::move(csv.entries), parse_dictionary_kind(csv.kind));
}

void save_sensing_matrix(std::string const &path, SensingMatrix const &phi) {
  write_file(path, phi.entries(), to_string(phi.kind()));
}

SensingMatrix load_sensing_matrix(std::string const &path) {
  auto csv = read_file(path);
  return SensingMatrix(std::move(csv.entries), parse_sensing_kind(csv.kind));
}

} // namespace cosparse
