#pragma once

#include "geocume/kernel.hpp"
#include "geocume/pointproc.hpp"

namespace geocume {

enum class DppMethod {
  automatic,  // matrix model for Ginibre kernels, grid spectral method otherwise
  grid,       // grid spectral method for every kernel
};

struct DppParams {
  DppMethod method = DppMethod::automatic;
  /// Grid cells per unit length for the spectral method.
  double cells_per_unit = 20.0;
  /// Upper bound on the number of grid cells.
  std::size_t max_cells = 4096;
};

/// One draw of the determinantal process with kernel `kernel` restricted to `window`.
///
/// Grid method: the kernel is discretized on the cell centers of a regular grid,
/// eigendecomposed, eigenvectors are kept by independent Bernoulli(lambda_i) draws and
/// cells are drawn by the sequential projection rule; each point is placed uniformly in
/// its cell.
///
/// Matrix model (Ginibre): eigenvalues of a random N x N upper Hessenberg matrix with
/// the law of the finite Ginibre ensemble are restricted to the window, N chosen so that
/// the finite-N kernel agrees with the infinite one on the window to ~1e-9; an amplitude
/// below one thins the points independently.
PointConfig sample_dpp(const Window& window, const KernelSpec& kernel, RngSeed seed, const DppParams& params = {});

/// Superposition of m independent draws with kernel K/m: the alpha-determinantal process
/// with alpha = -1/m. Copy j uses the stream derive_seed(seed, {j}); sample_dpp uses the
/// stream of copy 0, so m = 1 reproduces sample_dpp seed for seed.
PointConfig sample_alpha_dpp(const Window& window, const KernelSpec& kernel, int m, RngSeed seed,
                             const DppParams& params = {});

/// Matrix size used by the Ginibre matrix model for a window.
int ginibre_matrix_size(const Window& window);

}  // namespace geocume
