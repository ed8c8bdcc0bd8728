#pragma once

// Finite-dimensional Lie algebras given by structure constants, and direct
// sum splittings h = d (+) d' with their projections.
//
// Conventions: for a basis {e_a} the structure constants are stored as
// one dense matrix per output index, c[a](b, d), with
//     [e_b, e_d] = sum_a c[a](b, d) e_a.
// Covectors are stored in the dual basis {e^a}.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nhvak/errors.hpp"

namespace nhvak {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    std::ostringstream os;
    os << what << ": dimension " << got << " does not match " << want;
    throw ContractError(os.str());
  }
}

template <typename Scalar>
Scalar condition_number(const MatrixX<Scalar>& m) {
  if (m.size() == 0) return Scalar(1);
  if (!m.allFinite()) return std::numeric_limits<Scalar>::infinity();
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m);
  const auto& s = svd.singularValues();
  const Scalar smin = s(s.size() - 1);
  if (smin == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return s(0) / smin;
}

}  // namespace detail

/// Max-abs of the Jacobi cyclic sum [x,[y,z]] + [y,[z,x]] + [z,[x,y]] over
/// all basis triples, for a raw table of structure constants.
template <typename Scalar>
Scalar jacobi_residual(const std::vector<MatrixX<Scalar>>& c) {
  const int n = static_cast<int>(c.size());
  auto br = [&](const VectorX<Scalar>& x, const VectorX<Scalar>& y) {
    VectorX<Scalar> out(n);
    for (int a = 0; a < n; ++a) out(a) = x.dot(c[a] * y);
    return out;
  };
  Scalar worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const VectorX<Scalar> x = VectorX<Scalar>::Unit(n, i);
        const VectorX<Scalar> y = VectorX<Scalar>::Unit(n, j);
        const VectorX<Scalar> z = VectorX<Scalar>::Unit(n, k);
        const VectorX<Scalar> cyc = br(x, br(y, z)) + br(y, br(z, x)) + br(z, br(x, y));
        if (n > 0) worst = std::max(worst, cyc.cwiseAbs().maxCoeff());
      }
  return worst;
}

/// Real Lie algebra of small dimension with dense structure constants.
/// Immutable after construction.
template <typename Scalar>
class BasicLieAlgebra {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  /// One sparse table entry: [e_b, e_d] has e_a-component `value`.
  struct Entry {
    int a;
    int b;
    int d;
    Scalar value;
  };

  static constexpr double kJacobiTolerance = 1e-12;

  BasicLieAlgebra(std::vector<std::string> labels, std::vector<Matrix> constants)
      : labels_(std::move(labels)), c_(std::move(constants)) {
    const auto n = static_cast<Eigen::Index>(c_.size());
    if (n == 0) throw ContractError("Lie algebra must have positive dimension");
    if (static_cast<Eigen::Index>(labels_.size()) != n)
      throw ContractError("Lie algebra: one basis label per dimension required");
    for (const auto& slice : c_) {
      if (slice.rows() != n || slice.cols() != n)
        throw ContractError("Lie algebra: structure constant slices must be dim x dim");
      if ((slice + slice.transpose()).cwiseAbs().maxCoeff() != Scalar(0))
        throw ContractError("Lie algebra: structure constants are not antisymmetric");
    }
    const Scalar jac = jacobi_residual(c_);
    if (jac > Scalar(kJacobiTolerance)) {
      std::ostringstream os;
      os << "Lie algebra: Jacobi identity violated (residual " << jac << ")";
      throw ContractError(os.str());
    }
  }

  /// Builds the table from entries; [e_d, e_b] = -[e_b, e_d] is filled in.
  /// Conflicting or self-bracket entries are rejected.
  static BasicLieAlgebra from_entries(std::vector<std::string> labels,
                                      const std::vector<Entry>& entries) {
    const int n = static_cast<int>(labels.size());
    std::vector<Matrix> c(n, Matrix::Zero(n, n));
    std::vector<Matrix> seen(n, Matrix::Zero(n, n));
    for (const auto& e : entries) {
      if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n || e.d < 0 || e.d >= n)
        throw ContractError("structure constant entry index out of range");
      if (e.b == e.d) {
        if (e.value != Scalar(0))
          throw ContractError("structure constant entry [e_b, e_b] must vanish");
        continue;
      }
      if (seen[e.a](e.b, e.d) != Scalar(0) && c[e.a](e.b, e.d) != e.value)
        throw ContractError("conflicting structure constant entries");
      c[e.a](e.b, e.d) = e.value;
      c[e.a](e.d, e.b) = -e.value;
      seen[e.a](e.b, e.d) = seen[e.a](e.d, e.b) = Scalar(1);
    }
    return BasicLieAlgebra(std::move(labels), std::move(c));
  }

  static BasicLieAlgebra abelian(std::vector<std::string> labels) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    return BasicLieAlgebra(std::move(labels), std::vector<Matrix>(n, Matrix::Zero(n, n)));
  }

  int dim() const noexcept { return static_cast<int>(c_.size()); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<Matrix>& constants() const noexcept { return c_; }
  Scalar operator()(int a, int b, int d) const { return c_[a](b, d); }

  /// Matrix of ad_x = [x, .].
  Matrix ad(const Vector& x) const {
    detail::require_dim(x.size(), dim(), "ad");
    Matrix m(dim(), dim());
    for (int a = 0; a < dim(); ++a) m.row(a) = x.transpose() * c_[a];
    return m;
  }

  bool is_abelian() const {
    for (const auto& s : c_)
      if (!s.isZero(0)) return false;
    return true;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<Matrix> c_;
};

using LieAlgebra = BasicLieAlgebra<double>;

template <typename Scalar>
VectorX<Scalar> bracket(const BasicLieAlgebra<Scalar>& alg, const VectorX<Scalar>& x,
                        const VectorX<Scalar>& y) {
  detail::require_dim(x.size(), alg.dim(), "bracket");
  detail::require_dim(y.size(), alg.dim(), "bracket");
  VectorX<Scalar> out(alg.dim());
  for (int a = 0; a < alg.dim(); ++a) out(a) = x.dot(alg.constants()[a] * y);
  return out;
}

/// ad*_eta(phi), defined by <ad*_eta phi, y> = <phi, [eta, y]>.
template <typename Scalar>
VectorX<Scalar> ad_star(const BasicLieAlgebra<Scalar>& alg, const VectorX<Scalar>& eta,
                        const VectorX<Scalar>& phi) {
  detail::require_dim(phi.size(), alg.dim(), "ad_star");
  return alg.ad(eta).transpose() * phi;
}

template <typename Scalar>
Scalar jacobi_residual(const BasicLieAlgebra<Scalar>& alg) {
  return jacobi_residual(alg.constants());
}

/// Direct sum h = d (+) d' given by explicit bases. The projections are
/// computed once from the inverse of the combined basis matrix [D | D'].
template <typename Scalar>
class BasicSplitting {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  static constexpr double kMaxCondition = 1e12;

  /// Columns of `d_basis` span d, columns of `dprime_basis` span d'.
  BasicSplitting(Matrix d_basis, Matrix dprime_basis)
      : d_(std::move(d_basis)), dp_(std::move(dprime_basis)) {
    const Eigen::Index n = d_.rows();
    if (n == 0) throw ContractError("splitting: empty ambient dimension");
    if (dp_.rows() != n && dp_.cols() > 0)
      throw ContractError("splitting: basis vectors of different lengths");
    if (dp_.cols() == 0) dp_.resize(n, 0);
    if (d_.cols() + dp_.cols() != n)
      throw ContractError("splitting: d and d' bases do not add up to the algebra dimension");
    Matrix combined(n, n);
    combined << d_, dp_;
    const Scalar cond = detail::condition_number<Scalar>(combined);
    if (!(cond <= Scalar(kMaxCondition))) {
      std::ostringstream os;
      os << "splitting: combined basis is degenerate (condition number " << cond << ")";
      throw ContractError(os.str());
    }
    inv_ = combined.inverse();
    p_ = d_ * inv_.topRows(d_.cols());
    pp_ = dp_ * inv_.bottomRows(dp_.cols());
  }

  int dim() const noexcept { return static_cast<int>(d_.rows()); }
  int d_rank() const noexcept { return static_cast<int>(d_.cols()); }
  int dprime_rank() const noexcept { return static_cast<int>(dp_.cols()); }

  const Matrix& d_basis() const noexcept { return d_; }
  const Matrix& dprime_basis() const noexcept { return dp_; }
  const Matrix& P() const noexcept { return p_; }
  const Matrix& Pprime() const noexcept { return pp_; }

  /// Coordinates of x in the d_basis part of the combined basis.
  Vector d_coords(const Vector& x) const {
    detail::require_dim(x.size(), dim(), "d_coords");
    return inv_.topRows(d_rank()) * x;
  }
  Vector dprime_coords(const Vector& x) const {
    detail::require_dim(x.size(), dim(), "dprime_coords");
    return inv_.bottomRows(dprime_rank()) * x;
  }
  Vector embed_d(const Vector& coords) const {
    detail::require_dim(coords.size(), d_rank(), "embed_d");
    return d_ * coords;
  }
  Vector embed_dprime(const Vector& coords) const {
    detail::require_dim(coords.size(), dprime_rank(), "embed_dprime");
    return dp_ * coords;
  }
  /// The covector in Ann(d) whose pairing with the j-th d' basis vector is
  /// coords(j).
  Vector annihilator(const Vector& coords) const {
    detail::require_dim(coords.size(), dprime_rank(), "annihilator");
    return inv_.bottomRows(dprime_rank()).transpose() * coords;
  }
  /// Rows are the dual functionals of the d' basis (they vanish on d).
  auto dprime_dual() const { return inv_.bottomRows(dprime_rank()); }
  auto d_dual() const { return inv_.topRows(d_rank()); }

 private:
  Matrix d_;
  Matrix dp_;
  Matrix inv_;
  Matrix p_;
  Matrix pp_;
};

using Splitting = BasicSplitting<double>;

/// (P x, P' x).
template <typename Scalar>
std::pair<VectorX<Scalar>, VectorX<Scalar>> project(const BasicSplitting<Scalar>& split,
                                                    const VectorX<Scalar>& x) {
  detail::require_dim(x.size(), split.dim(), "project");
  return {split.P() * x, split.Pprime() * x};
}

/// Replaces d' by {b + delta_p(b) : b in d'}, keeping d. `delta_p` must map
/// into d and vanish on d.
template <typename Scalar>
BasicSplitting<Scalar> change_complement(const BasicSplitting<Scalar>& split,
                                         const MatrixX<Scalar>& delta_p, Scalar tol = Scalar(1e-12)) {
  const int n = split.dim();
  if (delta_p.rows() != n || delta_p.cols() != n)
    throw ContractError("change_complement: delta_p must be dim x dim");
  const Scalar scale = Scalar(1) + delta_p.cwiseAbs().maxCoeff();
  if (split.d_rank() > 0 && (delta_p * split.d_basis()).cwiseAbs().maxCoeff() > tol * scale)
    throw ContractError("change_complement: delta_p does not vanish on d");
  if ((split.Pprime() * delta_p).cwiseAbs().maxCoeff() > tol * scale)
    throw ContractError("change_complement: delta_p does not take values in d");
  MatrixX<Scalar> new_dp = split.dprime_basis() + delta_p * split.dprime_basis();
  return BasicSplitting<Scalar>(split.d_basis(), std::move(new_dp));
}

/// The map h -> d vanishing on d that sends the j-th d' basis vector to
/// sum_i coeffs(i, j) d_i. Every admissible complement change has this form.
template <typename Scalar>
MatrixX<Scalar> complement_change_map(const BasicSplitting<Scalar>& split,
                                      const MatrixX<Scalar>& coeffs) {
  if (coeffs.rows() != split.d_rank() || coeffs.cols() != split.dprime_rank())
    throw ContractError("complement_change_map: coefficient block must be dim(d) x dim(d')");
  return split.d_basis() * coeffs * split.dprime_dual();
}

}  // namespace nhvak
