#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "truemv/error.hpp"
#include "truemv/seqio.hpp"

namespace truemv {

// Luma PSNR in dB; identical frames report the 99.0 sentinel.
inline double psnr(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error("psnr: frame dimensions differ");
  long long sse = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const long long d = static_cast<long long>(a.samples[i]) - b.samples[i];
    sse += d * d;
  }
  if (sse == 0) return 99.0;
  const double mse = static_cast<double>(sse) / static_cast<double>(a.samples.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

struct RdPoint {
  double bits = 0;
  double psnr = 0;
};

// Four operating points in rate order (highest bits first).
struct RdCurve {
  std::array<RdPoint, 4> points;
};

// Points must arrive in increasing-QP order: rate strictly falling,
// quality strictly falling.
inline RdCurve make_rd_curve(const std::array<RdPoint, 4>& qp_ordered) {
  for (const RdPoint& p : qp_ordered) {
    if (!(p.bits > 0)) throw Error("rd curve: bits must be positive");
    if (!std::isfinite(p.psnr)) throw Error("rd curve: psnr must be finite");
  }
  for (int i = 1; i < 4; ++i) {
    if (!(qp_ordered[i].bits < qp_ordered[i - 1].bits))
      throw Error("rd curve: bits must fall strictly as qp rises");
    if (!(qp_ordered[i].psnr < qp_ordered[i - 1].psnr))
      throw Error("rd curve: psnr must fall strictly as qp rises");
  }
  return RdCurve{qp_ordered};
}

namespace detail {

// Cubic through four (x, y) points by divided differences, expanded to
// monomial coefficients around the given center.
inline std::array<double, 4> fit_cubic(const std::array<double, 4>& xs,
                                       const std::array<double, 4>& ys,
                                       double center) {
  std::array<double, 4> x{};
  for (int i = 0; i < 4; ++i) x[i] = xs[i] - center;

  std::array<double, 4> dd = ys;  // divided-difference table, in place
  for (int level = 1; level < 4; ++level)
    for (int i = 3; i >= level; --i)
      dd[i] = (dd[i] - dd[i - 1]) / (x[i] - x[i - level]);

  // Newton form dd[0] + dd[1](t-x0) + dd[2](t-x0)(t-x1) + ...
  std::array<double, 4> coeff{};
  std::array<double, 4> basis{1, 0, 0, 0};
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 4; ++j) coeff[j] += dd[k] * basis[j];
    if (k < 3) {
      std::array<double, 4> next{};
      for (int j = 0; j < 3; ++j) {
        next[j + 1] += basis[j];
        next[j] -= basis[j] * x[k];
      }
      basis = next;
    }
  }
  return coeff;
}

inline double integrate_cubic(const std::array<double, 4>& c, double lo, double hi) {
  auto antiderivative = [&](double t) {
    return ((c[3] / 4 * t + c[2] / 3) * t + c[1] / 2) * t * t + c[0] * t;
  };
  return antiderivative(hi) - antiderivative(lo);
}

}  // namespace detail

// Average rate difference of test vs anchor at equal quality, in percent.
// Interpolates log10(bits) over psnr with a cubic through each curve's four
// points and integrates analytically over the shared quality interval.
inline double bd_rate(const RdCurve& anchor, const RdCurve& test) {
  std::array<double, 4> ax{}, ay{}, tx{}, ty{};
  for (int i = 0; i < 4; ++i) {
    // Ascending psnr (points arrive in descending order).
    ax[i] = anchor.points[3 - i].psnr;
    ay[i] = std::log10(anchor.points[3 - i].bits);
    tx[i] = test.points[3 - i].psnr;
    ty[i] = std::log10(test.points[3 - i].bits);
  }
  const double lo = std::max(ax[0], tx[0]);
  const double hi = std::min(ax[3], tx[3]);
  if (!(lo < hi)) throw Error("bd_rate: quality ranges do not overlap");

  const double center = 0.5 * (lo + hi);
  const auto ca = detail::fit_cubic(ax, ay, center);
  const auto ct = detail::fit_cubic(tx, ty, center);
  const double ia = detail::integrate_cubic(ca, lo - center, hi - center);
  const double it = detail::integrate_cubic(ct, lo - center, hi - center);
  const double delta = (it - ia) / (hi - lo);
  return (std::pow(10.0, delta) - 1.0) * 100.0;
}

// Wall-clock change of test vs anchor, in percent.
inline double time_delta(double anchor_wall_seconds, double test_wall_seconds) {
  if (!(anchor_wall_seconds > 0)) throw Error("time_delta: anchor time must be positive");
  return (test_wall_seconds - anchor_wall_seconds) / anchor_wall_seconds * 100.0;
}

}  // namespace truemv
