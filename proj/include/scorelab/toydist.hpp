#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "scorelab/errors.hpp"
#include "scorelab/simplex.hpp"

namespace scorelab::toydist {

enum class Kind { PiecewiseLinearEta, SmoothSineEta, GaussianPair };

// Closed-form 1-d joint p(x, y) for binary y. Every query is analytic:
// marginal density and quantile, conditional eta(x) = p(y=1|x) with its
// derivative, and the log-conditional input gradient. Queries outside
// [x_lo, x_hi] clamp x to the nearest endpoint.
struct ToyDist {
  Kind kind = Kind::SmoothSineEta;
  double x_lo = -4.0, x_hi = 4.0;

  // SmoothSineEta: eta(x) = 0.5 + amplitude * sin(angular_freq * x),
  // uniform marginal on the support.
  double amplitude = 0.4;
  double angular_freq = 1.5707963267948966;  // pi/2

  // PiecewiseLinearEta: linear interpolation of (knot_x, knot_eta),
  // uniform marginal; knot_x ascending and spanning the support.
  std::vector<double> knot_x, knot_eta;

  // GaussianPair: p(x|y=1) = N(mu0, s2), p(x|y=0) = N(-mu0, s2),
  // p(y=1) = pi1. The support is a truncation window for quadrature only.
  double mu0 = 1.0, s2 = 1.0, pi1 = 0.5;

  static ToyDist smooth_sine(double amplitude = 0.4, double angular_freq = 1.5707963267948966,
                             double x_lo = -4.0, double x_hi = 4.0);
  static ToyDist piecewise_linear(std::vector<double> xs, std::vector<double> etas);
  static ToyDist gaussian_pair(double mu0, double s2, double pi1, double x_lo = -8.0,
                               double x_hi = 8.0);

  double clamp_x(double x) const;
  double eta(double x) const;
  // d eta / dx; one-sided from the right at piecewise knots, 0 outside the
  // support (the conditional is clamped there).
  double eta_prime(double x) const;

  Eigen::Vector2d cond_prob(double x) const { return simplex::binary_prob(eta(x)); }
  int hard_label(double x) const { return simplex::argmax_label(cond_prob(x)); }

  double marginal_pdf(double x) const;
  double marginal_cdf(double x) const;
  double marginal_quantile(double u) const;

  // d/dx log p(y|x); DomainError when p(y|x) = 0.
  double data_log_grad(double x, int y) const;

  // d/dx log p^sigma(x|y) for the Gaussian-smoothed class conditional;
  // GaussianPair only (the convolution stays Gaussian: -(x -+ mu0)/(s2+sigma)).
  double smoothed_cond_log_grad(double x, int y, double sigma) const;

  // n i.i.d. pairs: inverse-CDF draw of x from the marginal, then
  // y ~ Bernoulli(eta(x)). Identical seed, identical output.
  std::vector<std::pair<double, int>> sample(int n, std::uint64_t seed) const;
};

// Symmetric candidate set around x: grid_points values spaced epsilon/h
// apart with h = (grid_points-1)/2, so S(x) always contains x itself.
struct PerturbBall {
  double epsilon = 1.0;
  int grid_points = 41;

  PerturbBall() = default;
  PerturbBall(double eps, int g);

  double step() const { return epsilon / ((grid_points - 1) / 2); }
  Eigen::VectorXd candidates(double x) const;
  int center_index() const { return (grid_points - 1) / 2; }
};

// Finite substrate for expectations over p(x): points with nonnegative
// weights summing to one, so every weighted average is a convex combination.
struct WeightedPoints {
  Eigen::VectorXd xs, ws;
  Eigen::Index size() const { return xs.size(); }
};

// Density-weighted trapezoid rule on n support points.
WeightedPoints quadrature_points(const ToyDist& dist, int n);
// Density-weighted midpoint rule (no support endpoints among the nodes).
WeightedPoints midpoint_points(const ToyDist& dist, int n);
// Empirical distribution of n seeded draws, weight 1/n each.
WeightedPoints sample_points(const ToyDist& dist, int n, std::uint64_t seed);
WeightedPoints uniform_weighted(std::vector<double> xs);

// Intrinsic smoothness of the data conditional under the given metric:
// E_x[max over S(x) of D(p(y|x) || p(y|x'))].
struct ConstantC {
  simplex::MetricSpec metric;
  double value = 0.0;
  double grid_resolution = 0.0;
};

// The same expectation over an explicit point set (shared-grid evaluations).
double constant_c(const ToyDist& dist, const WeightedPoints& pts, const PerturbBall& ball,
                  const simplex::MetricSpec& spec);

// Quadrature version on outer_grid trapezoid points. Requires phi=Identity.
ConstantC compute_C(const ToyDist& dist, const PerturbBall& ball, const simplex::MetricSpec& spec,
                    int outer_grid);

}  // namespace scorelab::toydist
