#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace geocume {

using Complex = std::complex<double>;

/// Phi(s) = C exp(-c s^a_hat).
struct DecayEnvelope {
  double C = 1.0;
  double c = 1.0;
  double a_hat = 1.0;

  double operator()(double s) const;
};

enum class KernelKind { ginibre, gaussian, tabulated };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Hermitian kernel of a determinantal point process.
///
/// ginibre:   K(z, w) = amp * exp(conj(w) z - |z|^2/2 - |w|^2/2) on C = R^2, with
///            respect to the reference measure dA/pi. amp = 1 is the Ginibre process.
/// gaussian:  K(x, y) = rho * exp(-|x-y|^2 / ell^2) on R^d, Lebesgue reference measure.
/// tabulated: K(x, y) = k(|x-y|), k linearly interpolated from a radial table and zero
///            beyond its last node; Lebesgue reference measure.
class KernelSpec {
 public:
  static KernelSpec ginibre(double amplitude = 1.0);
  static KernelSpec gaussian(int d, double rho, double ell);
  static KernelSpec tabulated(int d, std::vector<double> radii, std::vector<double> values,
                              DecayEnvelope envelope);

  KernelKind kind() const { return kind_; }
  int dimension() const { return d_; }

  Complex operator()(std::span<const double> x, std::span<const double> y) const;

  /// Kernel multiplied by `factor` >= 0 (the |alpha| K of a superposition component).
  KernelSpec scaled(double factor) const;

  /// Density of the reference measure w.r.t. Lebesgue measure (1/pi for Ginibre).
  double measure_density() const;

  /// sup over x, y of |K(x, y)|.
  double sup_norm() const;

  /// K(x, x) times the reference density: the Lebesgue intensity of the process.
  double intensity() const;

  DecayEnvelope envelope() const { return envelope_; }

  /// Amplitude (ginibre) or rho (gaussian) or table scale (tabulated).
  double amplitude() const { return amp_; }
  double length_scale() const { return ell_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& values() const { return values_; }

 private:
  KernelKind kind_ = KernelKind::gaussian;
  int d_ = 2;
  double amp_ = 1.0;
  double ell_ = 1.0;
  std::vector<double> radii_;
  std::vector<double> values_;
  DecayEnvelope envelope_;
};

}  // namespace geocume
