#pragma once

// Central finite differences over tangent perturbations and tensor comparison.
// Functions are evaluated at x ⊕ dv, so one engine serves Euclidean vectors
// and Lie-group configurations alike.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rbdd/tensor.hpp"

namespace rbdd {

struct FdConfig {
  double h_fo = 4e-6;
  double h_so = 1e-4;
};

using TangentFn = std::function<VecX(const VecX& dv)>;
using TangentMatFn = std::function<MatX(const VecX& dv)>;

namespace detail {
inline void check_finite(const VecX& v)
{
  if (!v.allFinite()) throw std::domain_error("finite difference: non-finite function value");
}
inline void check_finite(const MatX& v)
{
  if (!v.allFinite()) throw std::domain_error("finite difference: non-finite function value");
}
} // namespace detail

// Column c = (f(x ⊕ h e_d) - f(x ⊕ -h e_d)) / 2h for d = dirs[c].
inline MatX fd_jacobian(const TangentFn& f, int n, const std::vector<int>& dirs, double h)
{
  if (!(h > 0)) throw std::invalid_argument("fd step must be positive");
  MatX J;
  VecX dv = VecX::Zero(n);
  for (size_t c = 0; c < dirs.size(); ++c) {
    const int d = dirs[c];
    dv[d] = h;
    const VecX fp = f(dv);
    dv[d] = -h;
    const VecX fm = f(dv);
    dv[d] = 0;
    detail::check_finite(fp);
    detail::check_finite(fm);
    if (c == 0) J.resize(fp.size(), static_cast<Eigen::Index>(dirs.size()));
    J.col(static_cast<Eigen::Index>(c)) = (fp - fm) / (2 * h);
  }
  return J;
}

inline std::vector<int> all_directions(int n)
{
  std::vector<int> d(n);
  for (int k = 0; k < n; ++k) d[k] = k;
  return d;
}

inline MatX fd_jacobian(const TangentFn& f, int n, double h) { return fd_jacobian(f, n, all_directions(n), h); }

// Page c = (F(x ⊕ h e_d) - F(x ⊕ -h e_d)) / 2h for d = dirs[c].
inline Tensor3 fd_tensor(const TangentMatFn& F, int n, const std::vector<int>& dirs, double h)
{
  if (!(h > 0)) throw std::invalid_argument("fd step must be positive");
  Tensor3 T;
  VecX dv = VecX::Zero(n);
  for (size_t c = 0; c < dirs.size(); ++c) {
    const int d = dirs[c];
    dv[d] = h;
    const MatX fp = F(dv);
    dv[d] = -h;
    const MatX fm = F(dv);
    dv[d] = 0;
    detail::check_finite(fp);
    detail::check_finite(fm);
    if (c == 0) T = Tensor3(fp.rows(), fp.cols(), static_cast<Eigen::Index>(dirs.size()));
    T.page(static_cast<Eigen::Index>(c)) = (fp - fm) / (2 * h);
  }
  return T;
}

inline Tensor3 fd_tensor(const TangentMatFn& F, int n, double h) { return fd_tensor(F, n, all_directions(n), h); }

inline MatX select_cols(const MatX& A, const std::vector<int>& dirs)
{
  MatX out(A.rows(), static_cast<Eigen::Index>(dirs.size()));
  for (size_t c = 0; c < dirs.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = A.col(dirs[c]);
  return out;
}

inline Tensor3 select_pages(const Tensor3& A, const std::vector<int>& dirs)
{
  Tensor3 out(A.dim(0), A.dim(1), static_cast<Eigen::Index>(dirs.size()));
  for (size_t c = 0; c < dirs.size(); ++c) out.page(static_cast<Eigen::Index>(c)) = A.page(dirs[c]);
  return out;
}

// Nested central differences along combined tangent steps, symmetrized.
// Returns (output, j, k).
inline Tensor3 fd_hessian(const TangentFn& f, int n, double h, bool symmetrize = true)
{
  if (!(h > 0)) throw std::invalid_argument("fd step must be positive");
  Tensor3 H;
  VecX dv = VecX::Zero(n);
  auto eval = [&](int j, double sj, int k, double sk) {
    dv.setZero();
    dv[j] += sj * h;
    dv[k] += sk * h;
    VecX y = f(dv);
    detail::check_finite(y);
    return y;
  };
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const VecX y = (eval(j, 1, k, 1) - eval(j, 1, k, -1) - eval(j, -1, k, 1) + eval(j, -1, k, -1)) / (4 * h * h);
      if (j == 0 && k == 0) H = Tensor3(y.size(), n, n);
      for (Eigen::Index i = 0; i < y.size(); ++i) H(i, j, k) = y[i];
    }
  if (symmetrize) {
    for (Eigen::Index i = 0; i < H.dim(0); ++i)
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          const double m = 0.5 * (H(i, j, k) + H(i, k, j));
          H(i, j, k) = H(i, k, j) = m;
        }
  }
  return H;
}

struct CompareReport {
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  std::array<Eigen::Index, 3> argmax = {0, 0, 0};
  double tol_rel = 0.0, tol_abs = 0.0;
  bool pass = true;
};

// Entry passes when |a - b| <= max(tol_abs, tol_rel * max(|a|, |b|)).
// Relative error uses denominator max(|a|, |b|, 1e-8).
inline CompareReport compare(const Tensor3& a, const Tensor3& b, double tol_rel, double tol_abs = 0.0)
{
  if (!a.same_shape(b))
    throw std::invalid_argument("compare: shape mismatch (" + std::to_string(a.dim(0)) + "x" +
                                std::to_string(a.dim(1)) + "x" + std::to_string(a.dim(2)) + " vs " +
                                std::to_string(b.dim(0)) + "x" + std::to_string(b.dim(1)) + "x" +
                                std::to_string(b.dim(2)) + ")");
  CompareReport r;
  r.tol_rel = tol_rel;
  r.tol_abs = tol_abs;
  double worst_excess = -1.0;
  for (Eigen::Index k = 0; k < a.dim(2); ++k)
    for (Eigen::Index j = 0; j < a.dim(1); ++j)
      for (Eigen::Index i = 0; i < a.dim(0); ++i) {
        const double x = a(i, j, k), y = b(i, j, k);
        const double err = std::abs(x - y);
        const double scale = std::max(std::abs(x), std::abs(y));
        const double rel = err / std::max(scale, 1e-8);
        const double allowed = std::max(tol_abs, tol_rel * scale);
        if (!(err <= allowed)) r.pass = false;
        r.max_abs_err = std::max(r.max_abs_err, err);
        r.max_rel_err = std::max(r.max_rel_err, rel);
        const double excess = allowed > 0 ? err / allowed : err;
        if (excess > worst_excess) {
          worst_excess = excess;
          r.argmax = {i, j, k};
        }
      }
  return r;
}

inline CompareReport compare(const MatX& a, const MatX& b, double tol_rel, double tol_abs = 0.0)
{
  return compare(as_tensor(a), as_tensor(b), tol_rel, tol_abs);
}

// Absolute floor for FD comparisons: tol_rel scaled by the reference magnitude
// (at least one), so entries that vanish analytically are judged on the scale
// of the object they belong to.
inline double scaled_floor(double tol_rel, double ref_max_abs) { return tol_rel * std::max(1.0, ref_max_abs); }

inline CompareReport compare_scaled(const Tensor3& a, const Tensor3& ref, double tol_rel)
{
  return compare(a, ref, tol_rel, scaled_floor(tol_rel, ref.max_abs()));
}

inline CompareReport compare_scaled(const MatX& a, const MatX& ref, double tol_rel)
{
  return compare(a, ref, tol_rel, scaled_floor(tol_rel, ref.size() ? ref.cwiseAbs().maxCoeff() : 0.0));
}

} // namespace rbdd
