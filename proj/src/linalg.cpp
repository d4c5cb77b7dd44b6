#include "auxguide/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "auxguide/error.hpp"
#include "auxguide/kernels.hpp"

namespace auxguide {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw Error(ErrorCode::ShapeMismatch, "matrix storage does not match rows*cols");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::ShapeMismatch, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(ErrorCode::ShapeMismatch, "matrix addition shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(ErrorCode::ShapeMismatch, "matrix subtraction shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "matrix product shape mismatch");
  Matrix c(a.rows(), b.cols());
  kernels::matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> v) {
  if (a.cols() != v.size()) throw Error(ErrorCode::ShapeMismatch, "matrix-vector shape mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = dot(a.row(r), v);
  return out;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(dot(a.data(), a.data())); }

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::ShapeMismatch, "max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double trace(const Matrix& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace auxguide

namespace auxguide::linalg {
namespace {

constexpr int kMaxSweeps = 100;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Extends an orthonormal set of columns to include `missing` unit vectors
// via Gram-Schmidt against the standard basis.
void complete_orthonormal(std::vector<Vector>& cols, const std::vector<bool>& valid) {
  const std::size_t m = cols.empty() ? 0 : cols.front().size();
  std::size_t next_basis = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (valid[j]) continue;
    while (next_basis < m) {
      Vector cand(m, 0.0);
      cand[next_basis++] = 1.0;
      // two passes of classical Gram-Schmidt
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
          if (i == j || (!valid[i] && i > j)) continue;
          const double proj = dot(cand, cols[i]);
          for (std::size_t r = 0; r < m; ++r) cand[r] -= proj * cols[i][r];
        }
      }
      const double nrm = norm2(cand);
      if (nrm > 1e-6) {
        for (double& v : cand) v /= nrm;
        cols[j] = std::move(cand);
        break;
      }
    }
  }
}

}  // namespace

SvdResult svd_thin(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw Error(ErrorCode::ShapeMismatch, "svd of empty matrix");
  if (!a.all_finite()) throw Error(ErrorCode::InvalidArgument, "svd input is not finite");

  const bool transposed = a.rows() < a.cols();
  const Matrix w = transposed ? a.transpose() : a;
  const std::size_t m = w.rows();
  const std::size_t n = w.cols();

  // Column-major working copies.
  std::vector<Vector> ucols(n, Vector(m));
  std::vector<Vector> vcols(n, Vector(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) ucols[j][i] = w(i, j);
    vcols[j][j] = 1.0;
  }

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(ucols[p], ucols[p]);
        const double beta = dot(ucols[q], ucols[q]);
        const double gamma = dot(ucols[p], ucols[q]);
        if (gamma == 0.0 || std::abs(gamma) <= 4.0 * kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = ucols[p][i];
          const double uq = ucols[q][i];
          ucols[p][i] = c * up - s * uq;
          ucols[q][i] = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = vcols[p][i];
          const double vq = vcols[q][i];
          vcols[p][i] = c * vp - s * vq;
          vcols[q][i] = s * vp + c * vq;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw Error(ErrorCode::NonConvergence, "Jacobi SVD did not converge in 100 sweeps");

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(ucols[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double smax = sigma[order.front()];
  const double floor = static_cast<double>(std::max(m, n)) * kEps * smax;
  std::vector<Vector> us(n), vs(n);
  std::vector<bool> valid(n, true);
  Vector s_sorted(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    s_sorted[j] = sigma[src];
    vs[j] = vcols[src];
    us[j] = ucols[src];
    if (sigma[src] > floor && sigma[src] > 0.0) {
      for (double& v : us[j]) v /= sigma[src];
    } else {
      valid[j] = false;
    }
  }
  complete_orthonormal(us, valid);

  // Assemble w = U diag(s) V^T with U m x n, V n x n.
  Matrix umat(m, n), vmat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) umat(i, j) = us[j][i];
    for (std::size_t i = 0; i < n; ++i) vmat(i, j) = vs[j][i];
  }

  SvdResult out;
  out.singular_values = std::move(s_sorted);
  if (!transposed) {
    out.u = std::move(umat);
    out.vt = vmat.transpose();
  } else {
    // a = w^T = V diag(s) U^T
    out.u = std::move(vmat);
    out.vt = umat.transpose();
  }
  return out;
}

double default_rank_tolerance(const Matrix& a) {
  return static_cast<double>(std::max(a.rows(), a.cols())) * kEps;
}

std::size_t numerical_rank(const SvdResult& svd, double tol) {
  if (svd.singular_values.empty()) return 0;
  const double cutoff = tol * svd.singular_values.front();
  std::size_t r = 0;
  for (double s : svd.singular_values)
    if (s > cutoff && s > 0.0) ++r;
  return r;
}

Matrix pseudo_inverse(const Matrix& a, std::optional<double> tol) {
  const double t = tol.value_or(default_rank_tolerance(a));
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "pseudo_inverse tolerance must be >= 0");
  const SvdResult svd = svd_thin(a);
  const std::size_t r = numerical_rank(svd, t);
  Matrix pinv(a.cols(), a.rows());
  for (std::size_t j = 0; j < r; ++j) {
    const double inv = 1.0 / svd.singular_values[j];
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double vi = svd.vt(j, i) * inv;
      if (vi == 0.0) continue;
      for (std::size_t k = 0; k < a.rows(); ++k) pinv(i, k) += vi * svd.u(k, j);
    }
  }
  return pinv;
}

ProjectorPair projector_pair(const Matrix& f, std::optional<double> tol) {
  const double t = tol.value_or(default_rank_tolerance(f));
  const SvdResult svd = svd_thin(f);
  const std::size_t r = numerical_rank(svd, t);
  if (r == 0) throw Error(ErrorCode::DegenerateFraming, "framing map has rank 0");
  const std::size_t n = f.cols();
  Matrix par(n, n);
  for (std::size_t j = 0; j < r; ++j) {
    const auto v = svd.vt.row(j);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) par(a, b) += v[a] * v[b];
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double s = 0.5 * (par(a, b) + par(b, a));
      par(a, b) = s;
      par(b, a) = s;
    }
  ProjectorPair out;
  out.perpendicular = Matrix::identity(n) - par;
  out.parallel = std::move(par);
  out.rank = r;
  return out;
}

ProjectorPair full_projector(std::size_t n) {
  ProjectorPair out;
  out.parallel = Matrix::identity(n);
  out.perpendicular = Matrix(n, n);
  out.rank = n;
  return out;
}

SymEigen sym_eigen(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  const double scale = std::max(1.0, max_abs(a));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-8 * scale)
        throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric within 1e-8");

  Matrix m = a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = s;
      m(j, i) = s;
    }
  Matrix v = Matrix::identity(n);
  const double total = std::max(frobenius_norm(m), std::numeric_limits<double>::min());

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (std::sqrt(off) <= kEps * total) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= kEps * kEps * total) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t =
            std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && n > 1)
    throw Error(ErrorCode::NonConvergence, "Jacobi eigensolver did not converge in 100 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return m(x, x) < m(y, y); });
  SymEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = m(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

Matrix sym_sqrt(const Matrix& a) {
  const SymEigen eig = sym_eigen(a);
  const std::size_t n = a.rows();
  const double lmax = eig.values.empty() ? 0.0 : std::abs(eig.values.back());
  const double clip = 1e-8 * std::max(1.0, lmax);
  Vector root(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lam = eig.values[j];
    if (lam < -clip)
      throw Error(ErrorCode::NegativeEigenvalue,
                  "eigenvalue " + std::to_string(lam) + " below clip tolerance");
    root[j] = std::sqrt(std::max(lam, 0.0));
  }
  Matrix out(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    if (root[j] == 0.0) continue;
    for (std::size_t r = 0; r < n; ++r) {
      const double vr = eig.vectors(r, j) * root[j];
      for (std::size_t c = 0; c < n; ++c) out(r, c) += vr * eig.vectors(c, j);
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      const double s = 0.5 * (out(r, c) + out(c, r));
      out(r, c) = s;
      out(c, r) = s;
    }
  return out;
}

Matrix projector_basis(const Matrix& projector) {
  const SymEigen eig = sym_eigen(projector);
  const std::size_t n = projector.rows();
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < n; ++j)
    if (eig.values[j] > 0.5) keep.push_back(j);
  Matrix basis(n, keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    for (std::size_t r = 0; r < n; ++r) basis(r, c) = eig.vectors(r, keep[c]);
  return basis;
}

}  // namespace auxguide::linalg
