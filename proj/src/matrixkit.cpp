#include "geocume/matrixkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "geocume/error.hpp"

namespace geocume {

namespace {

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw Error(ErrorKind::argument, std::string(what) + ": matrix must be square with n >= 1");
  }
  if (!a.allFinite()) {
    throw Error(ErrorKind::argument, std::string(what) + ": matrix has non-finite entries");
  }
}

bool same_cycle(const std::vector<int>& perm, int i, int j) {
  for (int k = perm[static_cast<std::size_t>(i)]; k != i; k = perm[static_cast<std::size_t>(k)]) {
    if (k == j) {
      return true;
    }
  }
  return false;
}

}  // namespace

Complex det_alpha(const CMatrix& a, double alpha) {
  require_square(a, "det_alpha");
  const int n = static_cast<int>(a.rows());
  if (n > kMaxPermutationOrder) {
    throw Error(ErrorKind::size, "det_alpha: n > 10 exceeds the permutation enumeration guard");
  }
  if (!std::isfinite(alpha)) {
    throw Error(ErrorKind::domain, "det_alpha: alpha must be finite");
  }
  std::vector<double> power(static_cast<std::size_t>(n) + 1, 1.0);
  for (int k = 1; k <= n; ++k) {
    power[static_cast<std::size_t>(k)] = power[static_cast<std::size_t>(k - 1)] * alpha;
  }

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  int cycles = n;
  auto term = [&]() {
    Complex prod = 1.0;
    for (int i = 0; i < n; ++i) {
      prod *= a(i, perm[static_cast<std::size_t>(i)]);
    }
    return power[static_cast<std::size_t>(n - cycles)] * prod;
  };

  // Heap's algorithm. Each step composes with a transposition of two positions, which
  // splits one cycle (same cycle) or merges two (different cycles).
  Complex sum = term();
  std::vector<int> c(static_cast<std::size_t>(n), 0);
  int i = 1;
  while (i < n) {
    if (c[static_cast<std::size_t>(i)] < i) {
      const int j = (i % 2 == 0) ? 0 : c[static_cast<std::size_t>(i)];
      cycles += same_cycle(perm, i, j) ? 1 : -1;
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
      sum += term();
      ++c[static_cast<std::size_t>(i)];
      i = 1;
    } else {
      c[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
  }
  return sum;
}

Complex det_lu(const CMatrix& a) {
  require_square(a, "det_lu");
  return a.partialPivLu().determinant();
}

double schatten1(const CMatrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw Error(ErrorKind::argument, "schatten1: matrix must be square with n >= 1");
  }
  const CMatrix gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(gram, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const double top = lambda.maxCoeff();
  if (!(top > 0.0)) {
    return 0.0;
  }
  double sum = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) > 1e-12 * top) {
      sum += std::sqrt(lambda(k));
    }
  }
  return sum;
}

ContinuityAudit det_continuity_check(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::argument, "det_continuity_check: dimension mismatch");
  }
  const double gap = std::abs(det_lu(a) - det_lu(b));
  const double bound = schatten1(a - b) * std::exp(schatten1(a) + schatten1(b));
  return {gap, bound, gap <= bound * (1.0 + 1e-12)};
}

CMatrix kernel_gram(const std::vector<std::vector<double>>& points, const KernelSpec& kernel, IndexSet subset) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (subset == 0 || ((subset >> i) & 1u)) {
      idx.push_back(i);
    }
  }
  const auto m = static_cast<Eigen::Index>(idx.size());
  CMatrix g(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      g(r, c) = kernel(points[idx[static_cast<std::size_t>(r)]], points[idx[static_cast<std::size_t>(c)]]);
    }
  }
  return g;
}

Complex alpha_correlation(const std::vector<std::vector<double>>& points, const KernelSpec& kernel,
                          double alpha) {
  return det_alpha(kernel_gram(points, kernel), alpha);
}

BlockGapAudit dpp_block_factorization_gap(const std::vector<std::vector<double>>& points,
                                          const KernelSpec& kernel, IndexSet block) {
  const int p = static_cast<int>(points.size());
  if (p < 2 || p > 8) {
    throw Error(ErrorKind::size, "dpp_block_factorization_gap: need 2 <= p <= 8");
  }
  const IndexSet ground = full_set(p);
  if (block == 0 || (block & ~ground) != 0 || block == ground) {
    throw Error(ErrorKind::argument, "dpp_block_factorization_gap: block must be a proper nonempty subset");
  }
  const auto d = static_cast<std::size_t>(kernel.dimension());
  for (const auto& x : points) {
    if (x.size() != d) {
      throw Error(ErrorKind::argument, "dpp_block_factorization_gap: point dimension differs from kernel");
    }
  }
  double dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double t = points[static_cast<std::size_t>(i)][k] - points[static_cast<std::size_t>(j)][k];
        s += t * t;
      }
      if (s == 0.0) {
        throw Error(ErrorKind::degenerate, "dpp_block_factorization_gap: duplicate points");
      }
      const bool crosses = (((block >> i) & 1u) != 0) != (((block >> j) & 1u) != 0);
      if (crosses) {
        dist = std::min(dist, std::sqrt(s));
      }
    }
  }
  const Complex full = det_lu(kernel_gram(points, kernel));
  const Complex inner = det_lu(kernel_gram(points, kernel, block));
  const Complex outer = det_lu(kernel_gram(points, kernel, ground & ~block));
  const double lhs = std::abs(full - inner * outer);
  const double rhs = static_cast<double>(p) * p * kernel.envelope()(dist) * std::exp(p * kernel.sup_norm());
  return {lhs, rhs, dist};
}

}  // namespace geocume
