#include "geocume/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geocume/error.hpp"

namespace geocume {

double DecayEnvelope::operator()(double s) const {
  if (std::isinf(a_hat)) {
    return s <= 1.0 ? C : 0.0;
  }
  return C * std::exp(-c * std::pow(s, a_hat));
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::ginibre: return "ginibre";
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::tabulated: return "tabulated";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "ginibre") return KernelKind::ginibre;
  if (name == "gaussian") return KernelKind::gaussian;
  if (name == "tabulated") return KernelKind::tabulated;
  throw Error(ErrorKind::config, "unknown kernel kind '" + name + "'");
}

KernelSpec KernelSpec::ginibre(double amplitude) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorKind::kernel, "ginibre amplitude must be finite and non-negative");
  }
  KernelSpec k;
  k.kind_ = KernelKind::ginibre;
  k.d_ = 2;
  k.amp_ = amplitude;
  // |K(z,w)| = amp exp(-|z-w|^2/2).
  k.envelope_ = {amplitude, 0.5, 2.0};
  return k;
}

KernelSpec KernelSpec::gaussian(int d, double rho, double ell) {
  if (d < 1 || d > 3) {
    throw Error(ErrorKind::argument, "gaussian kernel dimension must lie in [1, 3]");
  }
  if (!(rho >= 0.0) || !(ell > 0.0)) {
    throw Error(ErrorKind::kernel, "gaussian kernel needs rho >= 0 and ell > 0");
  }
  KernelSpec k;
  k.kind_ = KernelKind::gaussian;
  k.d_ = d;
  k.amp_ = rho;
  k.ell_ = ell;
  k.envelope_ = {rho, 1.0 / (ell * ell), 2.0};
  return k;
}

KernelSpec KernelSpec::tabulated(int d, std::vector<double> radii, std::vector<double> values,
                                 DecayEnvelope envelope) {
  if (d < 1 || d > 3) {
    throw Error(ErrorKind::argument, "tabulated kernel dimension must lie in [1, 3]");
  }
  if (radii.size() < 2 || radii.size() != values.size()) {
    throw Error(ErrorKind::argument, "tabulated kernel needs >= 2 nodes and matching value count");
  }
  if (radii.front() != 0.0) {
    throw Error(ErrorKind::argument, "tabulated kernel radii must start at 0");
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) {
      throw Error(ErrorKind::argument, "tabulated kernel radii must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (std::abs(values[i]) > envelope(radii[i]) * (1.0 + 1e-12)) {
      throw Error(ErrorKind::kernel, "tabulated kernel exceeds its decay envelope at r = " +
                                         std::to_string(radii[i]));
    }
  }
  KernelSpec k;
  k.kind_ = KernelKind::tabulated;
  k.d_ = d;
  k.amp_ = 1.0;
  k.radii_ = std::move(radii);
  k.values_ = std::move(values);
  k.envelope_ = envelope;
  return k;
}

Complex KernelSpec::operator()(std::span<const double> x, std::span<const double> y) const {
  double dist2 = 0.0;
  for (int i = 0; i < d_; ++i) {
    const double t = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
    dist2 += t * t;
  }
  switch (kind_) {
    case KernelKind::ginibre: {
      // conj(w) z = (a - ib)(c + id), z = x, w = y; Im = ad - bc.
      const double phase = y[0] * x[1] - y[1] * x[0];
      return std::polar(amp_ * std::exp(-0.5 * dist2), phase);
    }
    case KernelKind::gaussian:
      return {amp_ * std::exp(-dist2 / (ell_ * ell_)), 0.0};
    case KernelKind::tabulated: {
      const double r = std::sqrt(dist2);
      if (r >= radii_.back()) {
        return {0.0, 0.0};
      }
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
      const std::size_t j = static_cast<std::size_t>(it - radii_.begin());
      const double t = (r - radii_[j - 1]) / (radii_[j] - radii_[j - 1]);
      return {amp_ * ((1.0 - t) * values_[j - 1] + t * values_[j]), 0.0};
    }
  }
  return {0.0, 0.0};
}

KernelSpec KernelSpec::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::kernel, "kernel scale factor must be finite and non-negative");
  }
  KernelSpec k = *this;
  k.amp_ *= factor;
  k.envelope_.C *= factor;
  return k;
}

double KernelSpec::measure_density() const {
  return kind_ == KernelKind::ginibre ? 1.0 / std::numbers::pi : 1.0;
}

double KernelSpec::intensity() const {
  const double diag = kind_ == KernelKind::tabulated ? amp_ * values_.front() : amp_;
  return diag * measure_density();
}

double KernelSpec::sup_norm() const {
  if (kind_ == KernelKind::tabulated) {
    double m = 0.0;
    for (double v : values_) {
      m = std::max(m, std::abs(v));
    }
    return amp_ * m;
  }
  return amp_;
}

}  // namespace geocume
