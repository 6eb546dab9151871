#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "scorelab/errors.hpp"
#include "scorelab/rng.hpp"

namespace scorelab::simplex {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;

// Base dissimilarities between points of the probability simplex. L1, L2,
// Linf and JSdist satisfy the metric axioms; KL, JSdiv, SE and SqL1 do not.
enum class Base { L1, L2, Linf, JSdist, KL, JSdiv, SE, SqL1 };

// Optional monotone convex composition applied on top of the base.
enum class Phi { Identity, Square };

// A base dissimilarity together with its composition. SE and SqL1 are stored
// in composed form (Square over L2 / L1), so spec.base is never SE or SqL1
// after construction.
struct MetricSpec {
  Base base = Base::L2;
  Phi phi = Phi::Identity;

  MetricSpec() = default;
  MetricSpec(Base b, Phi f = Phi::Identity);

  bool is_distance_metric() const {
    return phi == Phi::Identity &&
           (base == Base::L1 || base == Base::L2 || base == Base::Linf || base == Base::JSdist);
  }

  std::string name() const;
  static MetricSpec parse(const std::string& name);

  friend bool operator==(const MetricSpec& a, const MetricSpec& b) {
    return a.base == b.base && a.phi == b.phi;
  }
};

// Expression-friendly cores. All logarithms are natural.

template <typename DP, typename DQ>
double l1_distance(const Eigen::MatrixBase<DP>& p, const Eigen::MatrixBase<DQ>& q) {
  return (p - q).cwiseAbs().sum();
}

template <typename DP, typename DQ>
double l2_distance(const Eigen::MatrixBase<DP>& p, const Eigen::MatrixBase<DQ>& q) {
  return (p - q).norm();
}

template <typename DP, typename DQ>
double linf_distance(const Eigen::MatrixBase<DP>& p, const Eigen::MatrixBase<DQ>& q) {
  return (p - q).cwiseAbs().maxCoeff();
}

// KL(p||q) with the 0*log(0/q) = 0 convention. Throws InfiniteDivergence
// when q_i = 0 < p_i.
template <typename DP, typename DQ>
double kl_divergence(const Eigen::MatrixBase<DP>& p, const Eigen::MatrixBase<DQ>& q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    const double qi = q[i];
    if (qi <= 0.0) throw InfiniteDivergence("KL(p||q): q has a zero entry where p does not");
    s += pi * std::log(pi / qi);
  }
  return s;
}

// JS(p||q) with the 1/2-weighted mixture; bounded by log 2.
template <typename DP, typename DQ>
double js_divergence(const Eigen::MatrixBase<DP>& p, const Eigen::MatrixBase<DQ>& q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p[i], qi = q[i];
    const double mi = 0.5 * (pi + qi);
    if (pi > 0.0) s += 0.5 * pi * std::log(pi / mi);
    if (qi > 0.0) s += 0.5 * qi * std::log(qi / mi);
  }
  return std::max(s, 0.0);
}

// D(p||q) for the given spec (base value, then phi).
double eval(const MetricSpec& spec, VecRef p, VecRef q);

// Componentwise d eval / d q_i, ignoring the simplex constraint. The
// constraint is handled downstream by the model's output Jacobian. At an
// Linf tie the whole (sub)gradient goes to the lowest tied index.
Eigen::VectorXd grad_q(const MetricSpec& spec, VecRef p, VecRef q);

// Componentwise d eval / d p_i, same conventions as grad_q.
Eigen::VectorXd grad_p(const MetricSpec& spec, VecRef p, VecRef q);

// Worst observed violations of the metric axioms over random simplex
// triples. Distance-flagged specs stay below 1e-9 on all three.
struct AxiomReport {
  double max_symmetry_violation = 0.0;
  double max_triangle_violation = 0.0;
  double max_negativity = 0.0;
  int trials = 0;
};

AxiomReport check_axioms(const MetricSpec& spec, int trials, std::uint64_t seed);

// KL(p||q) - ||p-q||_1^2 / 2. Nonnegative by Pinsker's inequality.
double pinsker_gap(VecRef p, VecRef q);

// Uniform (Dirichlet(1)) draw on the L-simplex via normalized exponentials.
Eigen::VectorXd sample_simplex(int dim, Rng& rng);

// Checks nonnegativity, unit sum (1e-9) and dim >= 2; throws on violation.
void validate_prob_vec(VecRef v);

// (1 - eta, eta) as a simplex point.
inline Eigen::Vector2d binary_prob(double eta) { return {1.0 - eta, eta}; }

// Hard label of a binary conditional; the tie goes to label 0.
inline int argmax_label(const Eigen::Vector2d& p) { return p[1] > p[0] ? 1 : 0; }

}  // namespace scorelab::simplex
