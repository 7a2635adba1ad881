#include "spinsim/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "spinsim/errors.hpp"

namespace spinsim {
namespace {

// Solves the 4x4 normal equations (J^T J + lambda diag) step = -J^T r by
// Gaussian elimination with partial pivoting.
bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b,
            std::array<double, 4>& x) {
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int row = col + 1; row < 4; ++row)
      if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
    if (std::abs(a[piv][col]) < 1e-300) return false;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (int row = col + 1; row < 4; ++row) {
      const double f = a[row][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  for (int row = 3; row >= 0; --row) {
    double s = b[row];
    for (int k = row + 1; k < 4; ++k) s -= a[row][k] * x[k];
    x[row] = s / a[row][row];
  }
  return true;
}

double chi2(std::span<const double> t, std::span<const double> y, double a,
            double mu, double sigma, double c) {
  double s = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double u = (t[i] - mu) / sigma;
    const double r = a * std::exp(-0.5 * u * u) + c - y[i];
    s += r * r;
  }
  return s;
}

}  // namespace

GaussFit fit_gaussian_profile(std::span<const double> t,
                              std::span<const double> y) {
  if (t.size() != y.size() || t.size() < 5)
    throw UsageError("fit_gaussian_profile: need >= 5 bins");
  const std::size_t n = t.size();

  // Moment initialization above the baseline.
  double ymin = y[0], ymax = y[0];
  std::size_t imax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ymin = std::min(ymin, y[i]);
    if (y[i] > ymax) {
      ymax = y[i];
      imax = i;
    }
  }
  const double span = std::abs(t[n - 1] - t[0]);
  double c = ymin;
  double a = ymax - ymin;
  double w = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = std::max(y[i] - c, 0.0);
    w += wi;
    m1 += wi * t[i];
  }
  double mu = w > 0 ? m1 / w : t[imax];
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = std::max(y[i] - c, 0.0);
    m2 += wi * (t[i] - mu) * (t[i] - mu);
  }
  double sigma = w > 0 ? std::sqrt(m2 / w) : span / 4.0;
  const double min_sigma = span / (4.0 * static_cast<double>(n));
  sigma = std::max(sigma, min_sigma);

  double lambda = 1e-3;
  double cost = chi2(t, y, a, mu, sigma, c);
  int iter = 0;
  for (; iter < 200; ++iter) {
    // Accumulate J^T J and J^T r.
    std::array<std::array<double, 4>, 4> jtj{};
    std::array<double, 4> jtr{};
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (t[i] - mu) / sigma;
      const double e = std::exp(-0.5 * u * u);
      const double r = a * e + c - y[i];
      const std::array<double, 4> j = {e, a * e * u / sigma,
                                       a * e * u * u / sigma, 1.0};
      for (int p = 0; p < 4; ++p) {
        jtr[p] += j[p] * r;
        for (int q = 0; q < 4; ++q) jtj[p][q] += j[p] * j[q];
      }
    }

    const double grad_norm =
        std::sqrt(jtr[0] * jtr[0] + jtr[1] * jtr[1] + jtr[2] * jtr[2] +
                  jtr[3] * jtr[3]);
    if (grad_norm < 1e-12 * (1.0 + cost)) break;

    auto damped = jtj;
    for (int p = 0; p < 4; ++p)
      damped[p][p] += lambda * std::max(jtj[p][p], 1e-30);
    std::array<double, 4> step{};
    std::array<double, 4> rhs = {-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
    if (!solve4(damped, rhs, step)) {
      lambda *= 10;
      continue;
    }
    const double a2 = a + step[0];
    const double mu2 = mu + step[1];
    double sigma2 = std::abs(sigma + step[2]);
    sigma2 = std::max(sigma2, min_sigma * 1e-3);
    const double c2 = c + step[3];
    const double cost2 = chi2(t, y, a2, mu2, sigma2, c2);
    if (cost2 < cost) {
      const double rel = (cost - cost2) / std::max(cost, 1e-300);
      a = a2;
      mu = mu2;
      sigma = sigma2;
      c = c2;
      cost = cost2;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (rel < 1e-12) break;
    } else {
      lambda *= 10;
      if (lambda > 1e12) break;
    }
  }
  if (iter >= 200)
    throw FitError("fit_gaussian_profile: no convergence in 200 iterations",
                   std::sqrt(cost));

  GaussFit fit;
  fit.amplitude = a;
  fit.t_peak = mu;
  fit.sigma_t = std::abs(sigma);
  fit.offset = c;
  fit.residual_norm = std::sqrt(cost);
  fit.iterations = iter;
  return fit;
}

double fit_line_through_origin(std::span<const double> x,
                               std::span<const double> y) {
  if (x.size() != y.size() || x.empty())
    throw UsageError("fit_line_through_origin: empty data");
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  if (sxx == 0.0) throw UsageError("fit_line_through_origin: degenerate x");
  return sxy / sxx;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw UsageError("fit_line: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw UsageError("fit_line: degenerate x");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace spinsim
