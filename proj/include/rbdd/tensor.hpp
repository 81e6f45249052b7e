#pragma once

// Third-order tensors over spatial matrices: cross-product tensor operators,
// page/column rotations and tensor-matrix products.

#include <stdexcept>
#include <string>
#include <vector>

#include "rbdd/spatial.hpp"

namespace rbdd {

// Dense d1 x d2 x d3 tensor; axis 1 runs fastest, pages (axis 3) slowest.
class Tensor3 {
public:
  Tensor3() = default;
  Tensor3(Eigen::Index d1, Eigen::Index d2, Eigen::Index d3)
    : d_{d1, d2, d3}, data_(static_cast<size_t>(d1 * d2 * d3), 0.0) {}

  static Tensor3 Zero(Eigen::Index d1, Eigen::Index d2, Eigen::Index d3) { return {d1, d2, d3}; }

  Eigen::Index dim(int axis) const { return d_[axis]; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(data_.size()); }

  double& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k)
  {
    return data_[static_cast<size_t>(i + d_[0] * (j + d_[1] * k))];
  }
  double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const
  {
    return data_[static_cast<size_t>(i + d_[0] * (j + d_[1] * k))];
  }

  Eigen::Map<MatX> page(Eigen::Index k) { return {data_.data() + d_[0] * d_[1] * k, d_[0], d_[1]}; }
  Eigen::Map<const MatX> page(Eigen::Index k) const
  {
    return {data_.data() + d_[0] * d_[1] * k, d_[0], d_[1]};
  }

  Eigen::Map<VecX> flat() { return {data_.data(), size()}; }
  Eigen::Map<const VecX> flat() const { return {data_.data(), size()}; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor3& o) const { return d_[0] == o.d_[0] && d_[1] == o.d_[1] && d_[2] == o.d_[2]; }

  Tensor3& operator+=(const Tensor3& o) { check(o); flat() += o.flat(); return *this; }
  Tensor3& operator-=(const Tensor3& o) { check(o); flat() -= o.flat(); return *this; }
  Tensor3& operator*=(double s) { flat() *= s; return *this; }

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
  friend Tensor3 operator-(Tensor3 a) { return a *= -1.0; }

  double max_abs() const { return data_.empty() ? 0.0 : flat().cwiseAbs().maxCoeff(); }

private:
  void check(const Tensor3& o) const
  {
    if (!same_shape(o)) throw std::invalid_argument("tensor shape mismatch");
  }

  Eigen::Index d_[3] = {0, 0, 0};
  std::vector<double> data_;
};

namespace detail {
template <class Op>
Tensor3 page_op(const Eigen::Ref<const MotionMat>& U, Op op)
{
  Tensor3 T(6, 6, U.cols());
  for (Eigen::Index k = 0; k < U.cols(); ++k) T.page(k) = op(Vec6(U.col(k)));
  return T;
}
} // namespace detail

// Page k is crm(U.col(k)).
inline Tensor3 crossM_op(const Eigen::Ref<const MotionMat>& U)
{
  return detail::page_op(U, [](const Vec6& v) { return crm(v); });
}

inline Tensor3 crossF_op(const Eigen::Ref<const MotionMat>& U)
{
  return detail::page_op(U, [](const Vec6& v) { return crf(v); });
}

inline Tensor3 crossFbar_op(const Eigen::Ref<const ForceMat>& F)
{
  return detail::page_op(F, [](const Vec6& f) { return crf_bar(f); });
}

inline Tensor3 coriolis_tensor(const Inertia& I, const Eigen::Ref<const MotionMat>& V)
{
  return detail::page_op(V, [&I](const Vec6& v) { return coriolis_matrix(I, v); });
}

// Page-wise transpose: out(j, i, k) = A(i, j, k).
inline Tensor3 rot12(const Tensor3& A)
{
  Tensor3 out(A.dim(1), A.dim(0), A.dim(2));
  for (Eigen::Index k = 0; k < A.dim(2); ++k) out.page(k) = A.page(k).transpose();
  return out;
}

// Column/page swap: out(i, k, j) = A(i, j, k).
inline Tensor3 rot23(const Tensor3& A)
{
  Tensor3 out(A.dim(0), A.dim(2), A.dim(1));
  for (Eigen::Index k = 0; k < A.dim(2); ++k)
    for (Eigen::Index j = 0; j < A.dim(1); ++j)
      for (Eigen::Index i = 0; i < A.dim(0); ++i) out(i, k, j) = A(i, j, k);
  return out;
}

// rot23 followed by rot12: out(k, i, j) = A(i, j, k).
inline Tensor3 rot231(const Tensor3& A)
{
  Tensor3 out(A.dim(2), A.dim(0), A.dim(1));
  for (Eigen::Index k = 0; k < A.dim(2); ++k)
    for (Eigen::Index j = 0; j < A.dim(1); ++j)
      for (Eigen::Index i = 0; i < A.dim(0); ++i) out(k, i, j) = A(i, j, k);
  return out;
}

// Z(i, j, k) = sum_l A(i, l, k) B(l, j)
inline Tensor3 tmprod(const Tensor3& A, const Eigen::Ref<const MatX>& B)
{
  if (A.dim(1) != B.rows())
    throw std::invalid_argument("tmprod: tensor axis 2 (" + std::to_string(A.dim(1)) +
                                ") does not match matrix rows (" + std::to_string(B.rows()) + ")");
  Tensor3 Z(A.dim(0), B.cols(), A.dim(2));
  for (Eigen::Index k = 0; k < A.dim(2); ++k) Z.page(k).noalias() = A.page(k) * B;
  return Z;
}

// Y(i, j, k) = sum_l B(i, l) A(l, j, k)
inline Tensor3 mtprod(const Eigen::Ref<const MatX>& B, const Tensor3& A)
{
  if (B.cols() != A.dim(0))
    throw std::invalid_argument("mtprod: matrix cols (" + std::to_string(B.cols()) +
                                ") does not match tensor axis 1 (" + std::to_string(A.dim(0)) + ")");
  Tensor3 Y(B.rows(), A.dim(1), A.dim(2));
  for (Eigen::Index k = 0; k < A.dim(2); ++k) Y.page(k).noalias() = B * A.page(k);
  return Y;
}

// Drops a singleton middle axis: d1 x 1 x d3 becomes a d1 x d3 matrix.
inline MatX squeeze(const Tensor3& A)
{
  if (A.dim(1) != 1) throw std::invalid_argument("squeeze: axis 2 must have size 1");
  MatX out(A.dim(0), A.dim(2));
  for (Eigen::Index k = 0; k < A.dim(2); ++k) out.col(k) = A.page(k).col(0);
  return out;
}

// Inverse of squeeze: a d1 x d3 matrix viewed as d1 x 1 x d3.
inline Tensor3 unsqueeze(const Eigen::Ref<const MatX>& M)
{
  Tensor3 out(M.rows(), 1, M.cols());
  for (Eigen::Index k = 0; k < M.cols(); ++k) out.page(k).col(0) = M.col(k);
  return out;
}

// Matrix as a single-page tensor.
inline Tensor3 as_tensor(const Eigen::Ref<const MatX>& M)
{
  Tensor3 out(M.rows(), M.cols(), 1);
  out.page(0) = M;
  return out;
}

} // namespace rbdd
