#pragma once

// Variable-exponent Lebesgue calculus on a discrete (cell-sum) measure.

#include <cstddef>
#include <span>
#include <vector>

namespace vexspec {

/// A variable exponent sampled once per cell. Every value is finite and
/// strictly greater than one; the extremes are cached on construction.
class ExponentField {
public:
  ExponentField() = default;
  explicit ExponentField(std::vector<double> values);

  static ExponentField constant(std::size_t cells, double value);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t cell) const noexcept { return values_[cell]; }
  std::span<const double> values() const noexcept { return values_; }

  /// Minimum over cells (the discrete p^-).
  double lo() const noexcept { return lo_; }
  /// Maximum over cells (the discrete p^+).
  double hi() const noexcept { return hi_; }

private:
  std::vector<double> values_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

struct NormResult {
  double norm = 0.0;
  int iterations = 0;
  /// Width of the final bisection bracket; the true norm lies in
  /// [norm - bracket_width, norm].
  double bracket_width = 0.0;

  double lower() const noexcept { return norm - bracket_width; }
};

/// Sum over cells of |u_c|^{p_c} * vol_c.
double modular(std::span<const double> u, const ExponentField& p,
               std::span<const double> cell_volumes);

/// Luxemburg norm inf{l > 0 : modular(u / l) <= 1} by bisection until the
/// bracket is no wider than `tol` (absolute). The returned value is the
/// upper bracket end, so modular(u / norm) <= 1 always holds.
NormResult luxemburg_norm(std::span<const double> u, const ExponentField& p,
                          std::span<const double> cell_volumes, double tol);

/// Same, with the tolerance 1e-12 relative to the upper bracket end.
NormResult luxemburg_norm(std::span<const double> u, const ExponentField& p,
                          std::span<const double> cell_volumes);

/// Cellwise p / (p - 1).
ExponentField conjugate(const ExponentField& p);

/// 1/p^- + 1/(p')^-, the constant in the variable-exponent Hoelder inequality.
double holder_constant(const ExponentField& p);

/// Cellwise product a * b (e.g. the s'(x) q(x) embedding target).
ExponentField product(const ExponentField& a, const ExponentField& b);

}  // namespace vexspec
