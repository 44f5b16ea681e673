#pragma once

#include <Eigen/Dense>
#include <vector>

#include "geocume/combinatorics.hpp"
#include "geocume/kernel.hpp"

namespace geocume {

using CMatrix = Eigen::MatrixXcd;

inline constexpr int kMaxPermutationOrder = 10;

/// sum over permutations tau of alpha^{n - nu(tau)} prod_i a_{i, tau(i)}, nu = number of cycles.
///
/// alpha = -1 gives the determinant, alpha = 1 the permanent and alpha = 0 the
/// diagonal product. n <= 10.
Complex det_alpha(const CMatrix& a, double alpha);

/// Determinant by partial-pivot LU.
Complex det_lu(const CMatrix& a);

/// Sum of singular values.
double schatten1(const CMatrix& a);

struct ContinuityAudit {
  double gap;    // |det A - det B|
  double bound;  // ||A - B||_S1 exp(||A||_S1 + ||B||_S1)
  bool ok;
};

ContinuityAudit det_continuity_check(const CMatrix& a, const CMatrix& b);

/// Gram matrix (K(x_i, x_j))_{i,j} over the points selected by `subset` (all if 0).
CMatrix kernel_gram(const std::vector<std::vector<double>>& points, const KernelSpec& kernel,
                    IndexSet subset = 0);

/// det_alpha of the kernel Gram matrix: the alpha-correlation function in kernel units.
Complex alpha_correlation(const std::vector<std::vector<double>>& points, const KernelSpec& kernel,
                          double alpha);

struct BlockGapAudit {
  double lhs;  // |rho(x) - rho(x_I) rho(x_{I^c})|
  double rhs;  // p^2 Phi(dist(x_I, x_{I^c})) exp(p ||K||_inf)
  double dist;
  bool ok() const { return lhs <= rhs; }
};

/// Factorization defect of the determinantal correlation function across the split {I, I^c}.
/// 2 <= p <= 8.
BlockGapAudit dpp_block_factorization_gap(const std::vector<std::vector<double>>& points,
                                          const KernelSpec& kernel, IndexSet block);

}  // namespace geocume
