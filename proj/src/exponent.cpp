#include "vexspec/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vexspec/error.hpp"

namespace vexspec {

ExponentField::ExponentField(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("exponent field has no cells");
  for (std::size_t c = 0; c < values_.size(); ++c) {
    const double v = values_[c];
    if (!std::isfinite(v) || !(v > 1.0))
      throw DomainError("exponent must be finite and > 1; cell " + std::to_string(c) +
                        " has " + std::to_string(v));
  }
  const auto [mn, mx] = std::minmax_element(values_.begin(), values_.end());
  lo_ = *mn;
  hi_ = *mx;
}

ExponentField ExponentField::constant(std::size_t cells, double value) {
  return ExponentField(std::vector<double>(cells, value));
}

namespace {

void check_shapes(std::span<const double> u, const ExponentField& p,
                  std::span<const double> vol) {
  if (u.size() != p.size() || u.size() != vol.size())
    throw ShapeError("modular: cell counts differ (u " + std::to_string(u.size()) +
                     ", p " + std::to_string(p.size()) + ", volumes " +
                     std::to_string(vol.size()) + ")");
}

// Evaluates modular(u / lambda) from cached logarithms of |u|.
class ScaledModular {
public:
  ScaledModular(std::span<const double> u, const ExponentField& p,
                std::span<const double> vol)
      : p_(p), vol_(vol), log_abs_(u.size()), nonzero_(u.size()) {
    for (std::size_t c = 0; c < u.size(); ++c) {
      nonzero_[c] = u[c] != 0.0;
      log_abs_[c] = nonzero_[c] ? std::log(std::fabs(u[c])) : 0.0;
    }
  }

  bool all_zero() const {
    return std::none_of(nonzero_.begin(), nonzero_.end(), [](char b) { return b != 0; });
  }

  double operator()(double lambda) const {
    const double log_lambda = std::log(lambda);
    double sum = 0.0;
    for (std::size_t c = 0; c < log_abs_.size(); ++c) {
      if (!nonzero_[c]) continue;
      sum += std::exp(p_[c] * (log_abs_[c] - log_lambda)) * vol_[c];
    }
    return sum;
  }

private:
  const ExponentField& p_;
  std::span<const double> vol_;
  std::vector<double> log_abs_;
  std::vector<char> nonzero_;
};

NormResult bisect_norm(std::span<const double> u, const ExponentField& p,
                       std::span<const double> vol, double abs_tol, double rel_tol) {
  check_shapes(u, p, vol);
  for (std::size_t c = 0; c < u.size(); ++c)
    if (!std::isfinite(u[c]))
      throw DomainError("luxemburg_norm: non-finite value in cell " + std::to_string(c));

  const ScaledModular rho(u, p, vol);
  if (rho.all_zero()) return {};

  NormResult out;
  double lo = 0.0;
  double hi = 1.0;
  while (rho(hi) > 1.0) {
    lo = hi;
    hi *= 2.0;
    ++out.iterations;
  }
  for (;;) {
    const double tol = std::max(abs_tol, rel_tol * hi);
    if (hi - lo <= tol) break;
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;  // bracket exhausted in floating point
    if (rho(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
    ++out.iterations;
  }
  out.norm = hi;
  out.bracket_width = hi - lo;
  return out;
}

}  // namespace

double modular(std::span<const double> u, const ExponentField& p,
               std::span<const double> cell_volumes) {
  check_shapes(u, p, cell_volumes);
  double sum = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u[c] == 0.0) continue;
    sum += std::pow(std::fabs(u[c]), p[c]) * cell_volumes[c];
  }
  return sum;
}

NormResult luxemburg_norm(std::span<const double> u, const ExponentField& p,
                          std::span<const double> cell_volumes, double tol) {
  if (!(tol > 0.0)) throw DomainError("luxemburg_norm: tolerance must be positive");
  return bisect_norm(u, p, cell_volumes, tol, 0.0);
}

NormResult luxemburg_norm(std::span<const double> u, const ExponentField& p,
                          std::span<const double> cell_volumes) {
  return bisect_norm(u, p, cell_volumes, 0.0, 1e-12);
}

ExponentField conjugate(const ExponentField& p) {
  std::vector<double> out(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) out[c] = p[c] / (p[c] - 1.0);
  return ExponentField(std::move(out));
}

double holder_constant(const ExponentField& p) {
  return 1.0 / p.lo() + 1.0 / conjugate(p).lo();
}

ExponentField product(const ExponentField& a, const ExponentField& b) {
  if (a.size() != b.size()) throw ShapeError("product: exponent fields differ in size");
  std::vector<double> out(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) out[c] = a[c] * b[c];
  return ExponentField(std::move(out));
}

}  // namespace vexspec
