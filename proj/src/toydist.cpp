#include "scorelab/toydist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scorelab/rng.hpp"

namespace scorelab::toydist {

namespace {

double normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double normal_cdf(double x, double mean, double var) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

ToyDist ToyDist::smooth_sine(double amplitude, double angular_freq, double x_lo, double x_hi) {
  if (!(amplitude >= 0.0 && amplitude <= 0.5))
    throw std::invalid_argument("smooth_sine: amplitude must lie in [0, 0.5] so eta stays in [0,1]");
  if (!(x_hi > x_lo)) throw std::invalid_argument("smooth_sine: empty support");
  ToyDist d;
  d.kind = Kind::SmoothSineEta;
  d.amplitude = amplitude;
  d.angular_freq = angular_freq;
  d.x_lo = x_lo;
  d.x_hi = x_hi;
  return d;
}

ToyDist ToyDist::piecewise_linear(std::vector<double> xs, std::vector<double> etas) {
  if (xs.size() < 2 || xs.size() != etas.size())
    throw std::invalid_argument("piecewise_linear: need matching knot lists with >= 2 knots");
  if (!std::is_sorted(xs.begin(), xs.end()))
    throw std::invalid_argument("piecewise_linear: knot x values must ascend");
  for (double e : etas)
    if (e < 0.0 || e > 1.0) throw std::invalid_argument("piecewise_linear: eta outside [0,1]");
  ToyDist d;
  d.kind = Kind::PiecewiseLinearEta;
  d.x_lo = xs.front();
  d.x_hi = xs.back();
  d.knot_x = std::move(xs);
  d.knot_eta = std::move(etas);
  return d;
}

ToyDist ToyDist::gaussian_pair(double mu0, double s2, double pi1, double x_lo, double x_hi) {
  if (!(s2 > 0.0)) throw std::invalid_argument("gaussian_pair: s2 must be positive");
  if (!(pi1 > 0.0 && pi1 < 1.0)) throw std::invalid_argument("gaussian_pair: pi1 must lie in (0,1)");
  if (!(x_hi > x_lo)) throw std::invalid_argument("gaussian_pair: empty support");
  ToyDist d;
  d.kind = Kind::GaussianPair;
  d.mu0 = mu0;
  d.s2 = s2;
  d.pi1 = pi1;
  d.x_lo = x_lo;
  d.x_hi = x_hi;
  return d;
}

double ToyDist::clamp_x(double x) const { return std::clamp(x, x_lo, x_hi); }

double ToyDist::eta(double x) const {
  x = clamp_x(x);
  switch (kind) {
    case Kind::SmoothSineEta:
      return 0.5 + amplitude * std::sin(angular_freq * x);
    case Kind::PiecewiseLinearEta: {
      const auto it = std::upper_bound(knot_x.begin(), knot_x.end(), x);
      if (it == knot_x.begin()) return knot_eta.front();
      if (it == knot_x.end()) return knot_eta.back();
      const std::size_t hi = static_cast<std::size_t>(it - knot_x.begin());
      const std::size_t lo = hi - 1;
      const double t = (x - knot_x[lo]) / (knot_x[hi] - knot_x[lo]);
      return knot_eta[lo] + t * (knot_eta[hi] - knot_eta[lo]);
    }
    case Kind::GaussianPair: {
      // p(y=1|x) = sigmoid(2 mu0 x / s2 + logit pi1)
      return sigmoid(2.0 * mu0 * x / s2 + std::log(pi1 / (1.0 - pi1)));
    }
  }
  return 0.5;
}

double ToyDist::eta_prime(double x) const {
  if (x < x_lo || x > x_hi) return 0.0;
  switch (kind) {
    case Kind::SmoothSineEta:
      return amplitude * angular_freq * std::cos(angular_freq * x);
    case Kind::PiecewiseLinearEta: {
      // Right-sided slope; the last segment's slope applies at x_hi.
      auto it = std::upper_bound(knot_x.begin(), knot_x.end(), x);
      std::size_t hi = (it == knot_x.end()) ? knot_x.size() - 1 : static_cast<std::size_t>(it - knot_x.begin());
      if (hi == 0) hi = 1;
      const std::size_t lo = hi - 1;
      return (knot_eta[hi] - knot_eta[lo]) / (knot_x[hi] - knot_x[lo]);
    }
    case Kind::GaussianPair: {
      const double e = eta(x);
      return e * (1.0 - e) * 2.0 * mu0 / s2;
    }
  }
  return 0.0;
}

double ToyDist::marginal_pdf(double x) const {
  switch (kind) {
    case Kind::SmoothSineEta:
    case Kind::PiecewiseLinearEta:
      return (x >= x_lo && x <= x_hi) ? 1.0 / (x_hi - x_lo) : 0.0;
    case Kind::GaussianPair:
      return pi1 * normal_pdf(x, mu0, s2) + (1.0 - pi1) * normal_pdf(x, -mu0, s2);
  }
  return 0.0;
}

double ToyDist::marginal_cdf(double x) const {
  switch (kind) {
    case Kind::SmoothSineEta:
    case Kind::PiecewiseLinearEta:
      if (x <= x_lo) return 0.0;
      if (x >= x_hi) return 1.0;
      return (x - x_lo) / (x_hi - x_lo);
    case Kind::GaussianPair:
      return pi1 * normal_cdf(x, mu0, s2) + (1.0 - pi1) * normal_cdf(x, -mu0, s2);
  }
  return 0.0;
}

double ToyDist::marginal_quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("marginal_quantile: u outside [0,1]");
  switch (kind) {
    case Kind::SmoothSineEta:
    case Kind::PiecewiseLinearEta:
      return x_lo + u * (x_hi - x_lo);
    case Kind::GaussianPair: {
      // Bisection on the mixture CDF; the bracket is widened past the
      // support window so extreme u map into the tails, not onto the clamp.
      const double spread = 8.0 * std::sqrt(s2) + std::abs(mu0);
      double lo = -spread, hi = spread;
      while (marginal_cdf(lo) > u) lo -= spread;
      while (marginal_cdf(hi) < u) hi += spread;
      for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (marginal_cdf(mid) < u ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return x_lo;
}

double ToyDist::data_log_grad(double x, int y) const {
  if (y != 0 && y != 1) throw std::invalid_argument("data_log_grad: y must be 0 or 1");
  const double e = eta(x);
  const double py = (y == 1) ? e : 1.0 - e;
  if (py <= 0.0) throw DomainError("data_log_grad: p(y|x) = 0");
  const double de = eta_prime(x);
  return (y == 1 ? de : -de) / py;
}

double ToyDist::smoothed_cond_log_grad(double x, int y, double sigma) const {
  if (kind != Kind::GaussianPair)
    throw UnsupportedKind("smoothed_cond_log_grad: defined for GaussianPair only");
  if (y != 0 && y != 1) throw std::invalid_argument("smoothed_cond_log_grad: y must be 0 or 1");
  if (sigma < 0.0) throw std::invalid_argument("smoothed_cond_log_grad: sigma must be >= 0");
  const double mean = (y == 1) ? mu0 : -mu0;
  return -(x - mean) / (s2 + sigma);
}

std::vector<std::pair<double, int>> ToyDist::sample(int n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Rng rng(seed);
  std::vector<std::pair<double, int>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = marginal_quantile(rng.uniform());
    const int y = rng.uniform() < eta(x) ? 1 : 0;
    out.emplace_back(x, y);
  }
  return out;
}

PerturbBall::PerturbBall(double eps, int g) : epsilon(eps), grid_points(g) {
  if (!(eps >= 0.0)) throw std::invalid_argument("PerturbBall: epsilon must be >= 0");
  if (g < 3 || g % 2 == 0) throw std::invalid_argument("PerturbBall: grid_points must be odd and >= 3");
}

Eigen::VectorXd PerturbBall::candidates(double x) const {
  const int h = (grid_points - 1) / 2;
  const double st = step();
  Eigen::VectorXd c(grid_points);
  for (int k = -h; k <= h; ++k) c[k + h] = x + k * st;
  c[h] = x;  // exact center regardless of rounding
  return c;
}

WeightedPoints quadrature_points(const ToyDist& dist, int n) {
  if (n < 2) throw std::invalid_argument("quadrature_points: need n >= 2");
  const double h = (dist.x_hi - dist.x_lo) / (n - 1);
  WeightedPoints pts;
  pts.xs.resize(n);
  pts.ws.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = dist.x_lo + i * h;
    pts.xs[i] = x;
    const double t = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    pts.ws[i] = t * dist.marginal_pdf(x);
  }
  pts.ws /= pts.ws.sum();
  return pts;
}

WeightedPoints midpoint_points(const ToyDist& dist, int n) {
  if (n < 1) throw std::invalid_argument("midpoint_points: need n >= 1");
  const double h = (dist.x_hi - dist.x_lo) / n;
  WeightedPoints pts;
  pts.xs.resize(n);
  pts.ws.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = dist.x_lo + (i + 0.5) * h;
    pts.xs[i] = x;
    pts.ws[i] = dist.marginal_pdf(x);
  }
  pts.ws /= pts.ws.sum();
  return pts;
}

WeightedPoints sample_points(const ToyDist& dist, int n, std::uint64_t seed) {
  const auto draws = dist.sample(n, seed);
  WeightedPoints pts;
  pts.xs.resize(n);
  pts.ws = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int i = 0; i < n; ++i) pts.xs[i] = draws[static_cast<std::size_t>(i)].first;
  return pts;
}

WeightedPoints uniform_weighted(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("uniform_weighted: empty point list");
  WeightedPoints pts;
  pts.xs = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  pts.ws = Eigen::VectorXd::Constant(pts.xs.size(), 1.0 / static_cast<double>(xs.size()));
  return pts;
}

double constant_c(const ToyDist& dist, const WeightedPoints& pts, const PerturbBall& ball,
                  const simplex::MetricSpec& spec) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pts.size(); ++i) {
    const double x = pts.xs[i];
    const Eigen::Vector2d anchor = dist.cond_prob(x);
    const Eigen::VectorXd cand = ball.candidates(x);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < cand.size(); ++k)
      worst = std::max(worst, simplex::eval(spec, anchor, dist.cond_prob(cand[k])));
    acc += pts.ws[i] * worst;
  }
  return acc;
}

ConstantC compute_C(const ToyDist& dist, const PerturbBall& ball, const simplex::MetricSpec& spec,
                    int outer_grid) {
  if (spec.phi != simplex::Phi::Identity)
    throw std::invalid_argument("compute_C: defined for the base metric (phi = Identity)");
  if (outer_grid < 10) throw std::invalid_argument("compute_C: outer_grid must be >= 10");
  ConstantC c;
  c.metric = spec;
  c.grid_resolution = (dist.x_hi - dist.x_lo) / (outer_grid - 1);
  c.value = constant_c(dist, quadrature_points(dist, outer_grid), ball, spec);
  return c;
}

}  // namespace scorelab::toydist
