#include "geocume/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "geocume/error.hpp"

namespace geocume {

namespace {

struct GridLayout {
  int d = 2;
  int per_axis = 1;
  double lo = 0.0;
  double h = 1.0;
  std::size_t cells = 1;

  std::vector<double> center(std::size_t flat) const {
    std::vector<double> c(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      const auto idx = static_cast<int>(flat % static_cast<std::size_t>(per_axis));
      flat /= static_cast<std::size_t>(per_axis);
      c[static_cast<std::size_t>(k)] = lo + (idx + 0.5) * h;
    }
    return c;
  }
};

GridLayout make_grid(const Window& window, const DppParams& params) {
  if (!(params.cells_per_unit > 0.0)) {
    throw Error(ErrorKind::argument, "grid resolution must be positive");
  }
  GridLayout g;
  g.d = window.d;
  g.per_axis = std::max(1, static_cast<int>(std::ceil(window.side() * params.cells_per_unit - 1e-9)));
  const double cells = std::pow(static_cast<double>(g.per_axis), g.d);
  if (cells > static_cast<double>(params.max_cells)) {
    std::ostringstream os;
    os << "grid spectral sampler needs " << cells << " cells, above the limit of " << params.max_cells
       << "; reduce the window or the resolution";
    throw Error(ErrorKind::size, os.str());
  }
  g.cells = static_cast<std::size_t>(cells);
  g.h = window.side() / g.per_axis;
  g.lo = -window.half_side();
  return g;
}

// Eigenpairs of the discretized kernel, shared across draws.
struct Spectrum {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd real_vectors;
  Eigen::MatrixXcd complex_vectors;
  bool is_complex = false;
};

std::string spectrum_key(const KernelSpec& kernel, const GridLayout& g) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kernel.kind()) << '|' << kernel.dimension() << '|' << kernel.amplitude() << '|'
     << kernel.length_scale() << '|' << g.per_axis << '|' << g.h << '|' << g.lo;
  for (double r : kernel.radii()) os << ',' << r;
  os << '|';
  for (double v : kernel.values()) os << ',' << v;
  return os.str();
}

void check_spectrum(const Eigen::VectorXd& lambda) {
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -1e-8) {
      throw Error(ErrorKind::kernel, "discretized kernel is not positive semi-definite (eigenvalue " +
                                         std::to_string(lambda(i)) + ")");
    }
    if (lambda(i) > 1.0 + 1e-8) {
      throw Error(ErrorKind::kernel, "discretized kernel has eigenvalue " + std::to_string(lambda(i)) +
                                         " > 1; the kernel is not a contraction");
    }
  }
}

std::shared_ptr<const Spectrum> grid_spectrum(const KernelSpec& kernel, const GridLayout& g) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const Spectrum>> memo;
  const std::string key = spectrum_key(kernel, g);
  {
    std::lock_guard<std::mutex> lock(mutex);
    const auto it = memo.find(key);
    if (it != memo.end()) {
      return it->second;
    }
  }
  auto spectrum = std::make_shared<Spectrum>();
  const auto n = static_cast<Eigen::Index>(g.cells);
  const double weight = std::pow(g.h, g.d) * kernel.measure_density();
  std::vector<std::vector<double>> centers(g.cells);
  for (std::size_t i = 0; i < g.cells; ++i) {
    centers[i] = g.center(i);
  }
  if (kernel.kind() == KernelKind::ginibre) {
    Eigen::MatrixXcd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const Complex v = kernel(centers[static_cast<std::size_t>(i)], centers[static_cast<std::size_t>(j)]) * weight;
        a(i, j) = v;
        a(j, i) = std::conj(v);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a);
    spectrum->lambda = solver.eigenvalues();
    spectrum->complex_vectors = solver.eigenvectors();
    spectrum->is_complex = true;
  } else {
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = kernel(centers[static_cast<std::size_t>(i)], centers[static_cast<std::size_t>(j)]).real() * weight;
        a(i, j) = v;
        a(j, i) = v;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    spectrum->lambda = solver.eigenvalues();
    spectrum->real_vectors = solver.eigenvectors();
  }
  check_spectrum(spectrum->lambda);
  std::lock_guard<std::mutex> lock(mutex);
  return memo.emplace(key, std::move(spectrum)).first->second;
}

// Sequential projection sampler on the selected eigenvectors (columns of v).
template <class Scalar>
std::vector<std::size_t> project_sample(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v, Rng& rng) {
  const Eigen::Index cells = v.rows();
  const Eigen::Index k = v.cols();
  std::vector<double> residual(static_cast<std::size_t>(cells));
  for (Eigen::Index i = 0; i < cells; ++i) {
    residual[static_cast<std::size_t>(i)] = v.row(i).squaredNorm();
  }
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> basis;
  basis.reserve(static_cast<std::size_t>(k));
  std::vector<std::size_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index step = 0; step < k; ++step) {
    double total = 0.0;
    for (double r : residual) {
      total += r;
    }
    double u = rng.uniform() * total;
    std::size_t pick = residual.size() - 1;
    for (std::size_t i = 0; i < residual.size(); ++i) {
      u -= residual[i];
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    while (residual[pick] <= 0.0 && pick > 0) {
      --pick;
    }
    chosen.push_back(pick);
    // New orthonormal direction: the chosen row with the span of earlier rows removed.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = v.row(static_cast<Eigen::Index>(pick)).adjoint();
    for (const auto& b : basis) {
      w -= b * b.dot(w);
    }
    const double norm = w.norm();
    if (!(norm > 0.0)) {
      break;
    }
    w /= norm;
    for (Eigen::Index i = 0; i < cells; ++i) {
      const Scalar c = v.row(i) * w;
      residual[static_cast<std::size_t>(i)] = std::max(0.0, residual[static_cast<std::size_t>(i)] - std::norm(c));
    }
    residual[pick] = 0.0;
    basis.push_back(std::move(w));
  }
  return chosen;
}

PointConfig sample_grid(const Window& window, const KernelSpec& kernel, RngSeed stream, const DppParams& params) {
  PointConfig config(window);
  if (kernel.sup_norm() == 0.0) {
    return config;
  }
  const GridLayout g = make_grid(window, params);
  const auto spectrum = grid_spectrum(kernel, g);
  Rng rng(stream);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < spectrum->lambda.size(); ++i) {
    const double p = std::clamp(spectrum->lambda(i), 0.0, 1.0);
    if (rng.bernoulli(p)) {
      keep.push_back(i);
    }
  }
  std::vector<std::size_t> cells;
  if (!keep.empty()) {
    if (spectrum->is_complex) {
      Eigen::MatrixXcd v(spectrum->complex_vectors.rows(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c) {
        v.col(static_cast<Eigen::Index>(c)) = spectrum->complex_vectors.col(keep[c]);
      }
      cells = project_sample(v, rng);
    } else {
      Eigen::MatrixXd v(spectrum->real_vectors.rows(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c) {
        v.col(static_cast<Eigen::Index>(c)) = spectrum->real_vectors.col(keep[c]);
      }
      cells = project_sample(v, rng);
    }
  }
  config.reserve(cells.size());
  for (std::size_t cell : cells) {
    std::vector<double> x = g.center(cell);
    for (auto& coord : x) {
      coord = std::clamp(coord + (rng.uniform() - 0.5) * g.h, -window.half_side(), window.half_side());
    }
    config.add(x);
  }
  return config;
}

PointConfig sample_ginibre_matrix(const Window& window, const KernelSpec& kernel, RngSeed stream) {
  PointConfig config(window);
  const double amp = kernel.amplitude();
  if (amp > 1.0 + 1e-12) {
    throw Error(ErrorKind::kernel, "Ginibre amplitude above 1 is not a contraction");
  }
  if (amp == 0.0) {
    return config;
  }
  const int n = ginibre_matrix_size(window);
  Rng rng(stream);
  // Upper Hessenberg form of an n x n matrix with iid standard complex Gaussian entries:
  // iid CN(0,1) on and above the diagonal, sqrt(Gamma(n-1-k)) on the subdiagonal.
  std::vector<std::complex<double>> h(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  const double s = std::sqrt(0.5);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      h[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = {s * re, s * im};
    }
    if (j + 1 < n) {
      h[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j + 1)] =
          std::sqrt(rng.gamma(static_cast<double>(n - 1 - j)));
    }
  }
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  std::complex<double> z_dummy{};
  const lapack_int info =
      LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n, h.data(), n, w.data(), &z_dummy, 1);
  if (info != 0) {
    throw Error(ErrorKind::kernel, "Hessenberg eigenvalue solver failed (info " + std::to_string(info) + ")");
  }
  // Eigenvalue order from the QR iteration is deterministic; sort for a canonical layout.
  std::sort(w.begin(), w.end(), [](const auto& a, const auto& b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  for (const auto& z : w) {
    const double x[2] = {z.real(), z.imag()};
    if (!window.contains(x)) {
      continue;
    }
    if (amp < 1.0 && !rng.bernoulli(amp)) {
      continue;
    }
    config.add(x);
  }
  return config;
}

PointConfig draw_component(const Window& window, const KernelSpec& kernel, RngSeed stream, const DppParams& params) {
  if (window.d != kernel.dimension()) {
    throw Error(ErrorKind::argument, "window dimension differs from kernel dimension");
  }
  if (kernel.kind() == KernelKind::ginibre && params.method == DppMethod::automatic) {
    return sample_ginibre_matrix(window, kernel, stream);
  }
  return sample_grid(window, kernel, stream, params);
}

}  // namespace

int ginibre_matrix_size(const Window& window) {
  if (window.d != 2) {
    throw Error(ErrorKind::argument, "Ginibre process lives in dimension 2");
  }
  // Squared distance from the origin to a window corner.
  const double r2 = 0.5 * window.volume();
  return static_cast<int>(std::ceil(r2 + 6.0 * std::sqrt(r2) + 10.0));
}

PointConfig sample_dpp(const Window& window, const KernelSpec& kernel, RngSeed seed, const DppParams& params) {
  PointConfig config = draw_component(window, kernel, derive_seed(seed, {0}), params);
  config.seed = seed.value;
  return config;
}

PointConfig sample_alpha_dpp(const Window& window, const KernelSpec& kernel, int m, RngSeed seed,
                             const DppParams& params) {
  if (m < 1) {
    throw Error(ErrorKind::domain, "alpha-DPP needs alpha = -1/m with m >= 1");
  }
  const KernelSpec component = kernel.scaled(1.0 / m);
  PointConfig config(window);
  for (int j = 0; j < m; ++j) {
    const PointConfig part = draw_component(window, component, derive_seed(seed, {static_cast<std::uint64_t>(j)}), params);
    config.reserve(config.size() + part.size());
    for (std::size_t i = 0; i < part.size(); ++i) {
      config.add(part.point(i));
    }
  }
  config.seed = seed.value;
  return config;
}

}  // namespace geocume
