#include "scorelab/simplex.hpp"

#include <cmath>

namespace scorelab::simplex {

namespace {

void check_dims(VecRef p, VecRef q) {
  if (p.size() != q.size())
    throw std::invalid_argument("metric eval: dimension mismatch (" + std::to_string(p.size()) +
                                " vs " + std::to_string(q.size()) + ")");
  if (p.size() < 2) throw std::invalid_argument("metric eval: need at least 2 components");
}

// Index of the largest |p_i - q_i|, lowest index on ties.
Eigen::Index linf_argmax(VecRef p, VecRef q) {
  Eigen::Index best = 0;
  double best_val = std::abs(p[0] - q[0]);
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    const double v = std::abs(p[i] - q[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double eval_base(Base base, VecRef p, VecRef q) {
  switch (base) {
    case Base::L1: return l1_distance(p, q);
    case Base::L2: return l2_distance(p, q);
    case Base::Linf: return linf_distance(p, q);
    case Base::KL: return kl_divergence(p, q);
    case Base::JSdiv: return js_divergence(p, q);
    case Base::JSdist: return std::sqrt(js_divergence(p, q));
    default: throw std::logic_error("composed base survived MetricSpec normalization");
  }
}

Eigen::VectorXd grad_base_q(Base base, VecRef p, VecRef q) {
  const Eigen::Index n = p.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  switch (base) {
    case Base::L1:
      for (Eigen::Index i = 0; i < n; ++i) g[i] = -sgn(p[i] - q[i]);
      return g;
    case Base::L2: {
      const double d = l2_distance(p, q);
      if (d == 0.0) return g;
      return (q - p) / d;
    }
    case Base::Linf: {
      const Eigen::Index i = linf_argmax(p, q);
      g[i] = -sgn(p[i] - q[i]);
      return g;
    }
    case Base::KL:
      for (Eigen::Index i = 0; i < n; ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] <= 0.0) throw InfiniteDivergence("grad KL: q has a zero entry where p does not");
        g[i] = -p[i] / q[i];
      }
      return g;
    case Base::JSdiv:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mi = 0.5 * (p[i] + q[i]);
        if (q[i] > 0.0 && mi > 0.0) g[i] = 0.5 * std::log(q[i] / mi);
      }
      return g;
    case Base::JSdist: {
      const double js = js_divergence(p, q);
      if (js == 0.0) return g;
      return grad_base_q(Base::JSdiv, p, q) / (2.0 * std::sqrt(js));
    }
    default: throw std::logic_error("composed base survived MetricSpec normalization");
  }
}

Eigen::VectorXd grad_base_p(Base base, VecRef p, VecRef q) {
  const Eigen::Index n = p.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  switch (base) {
    case Base::L1:
      for (Eigen::Index i = 0; i < n; ++i) g[i] = sgn(p[i] - q[i]);
      return g;
    case Base::L2: {
      const double d = l2_distance(p, q);
      if (d == 0.0) return g;
      return (p - q) / d;
    }
    case Base::Linf: {
      const Eigen::Index i = linf_argmax(p, q);
      g[i] = sgn(p[i] - q[i]);
      return g;
    }
    case Base::KL:
      for (Eigen::Index i = 0; i < n; ++i) {
        if (p[i] <= 0.0 || q[i] <= 0.0)
          throw InfiniteDivergence("grad_p KL: needs strictly positive entries");
        g[i] = std::log(p[i] / q[i]) + 1.0;
      }
      return g;
    case Base::JSdiv:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mi = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0 && mi > 0.0) g[i] = 0.5 * std::log(p[i] / mi);
      }
      return g;
    case Base::JSdist: {
      const double js = js_divergence(p, q);
      if (js == 0.0) return g;
      return grad_base_p(Base::JSdiv, p, q) / (2.0 * std::sqrt(js));
    }
    default: throw std::logic_error("composed base survived MetricSpec normalization");
  }
}

}  // namespace

MetricSpec::MetricSpec(Base b, Phi f) : base(b), phi(f) {
  if (b == Base::SE || b == Base::SqL1) {
    if (f == Phi::Square)
      throw std::invalid_argument("MetricSpec: SE / SqL1 already carry the Square composition");
    base = (b == Base::SE) ? Base::L2 : Base::L1;
    phi = Phi::Square;
  }
}

std::string MetricSpec::name() const {
  if (phi == Phi::Square) {
    if (base == Base::L2) return "se";
    if (base == Base::L1) return "sql1";
  }
  std::string n;
  switch (base) {
    case Base::L1: n = "l1"; break;
    case Base::L2: n = "l2"; break;
    case Base::Linf: n = "linf"; break;
    case Base::JSdist: n = "jsdist"; break;
    case Base::KL: n = "kl"; break;
    case Base::JSdiv: n = "jsdiv"; break;
    default: n = "?"; break;
  }
  if (phi == Phi::Square) n = "sq-" + n;
  return n;
}

MetricSpec MetricSpec::parse(const std::string& name) {
  std::string n = name;
  Phi phi = Phi::Identity;
  if (n.rfind("sq-", 0) == 0) {
    phi = Phi::Square;
    n = n.substr(3);
  }
  if (n == "l1") return {Base::L1, phi};
  if (n == "l2") return {Base::L2, phi};
  if (n == "linf") return {Base::Linf, phi};
  if (n == "jsdist") return {Base::JSdist, phi};
  if (n == "kl") return {Base::KL, phi};
  if (n == "jsdiv") return {Base::JSdiv, phi};
  if (phi == Phi::Identity && n == "se") return {Base::SE};
  if (phi == Phi::Identity && n == "sql1") return {Base::SqL1};
  throw std::invalid_argument("unknown metric name: " + name);
}

double eval(const MetricSpec& spec, VecRef p, VecRef q) {
  check_dims(p, q);
  const double d = eval_base(spec.base, p, q);
  return spec.phi == Phi::Square ? d * d : d;
}

Eigen::VectorXd grad_q(const MetricSpec& spec, VecRef p, VecRef q) {
  check_dims(p, q);
  Eigen::VectorXd g = grad_base_q(spec.base, p, q);
  if (spec.phi == Phi::Square) g *= 2.0 * eval_base(spec.base, p, q);
  return g;
}

Eigen::VectorXd grad_p(const MetricSpec& spec, VecRef p, VecRef q) {
  check_dims(p, q);
  Eigen::VectorXd g = grad_base_p(spec.base, p, q);
  if (spec.phi == Phi::Square) g *= 2.0 * eval_base(spec.base, p, q);
  return g;
}

AxiomReport check_axioms(const MetricSpec& spec, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_axioms: trials must be >= 1");
  Rng rng(seed);
  AxiomReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd p = sample_simplex(3, rng);
    const Eigen::VectorXd q = sample_simplex(3, rng);
    const Eigen::VectorXd r = sample_simplex(3, rng);
    const double dpq = eval(spec, p, q);
    const double dqp = eval(spec, q, p);
    const double dpr = eval(spec, p, r);
    const double drq = eval(spec, r, q);
    rep.max_negativity = std::max(rep.max_negativity, -std::min({dpq, dqp, dpr, drq}));
    rep.max_symmetry_violation = std::max(rep.max_symmetry_violation, std::abs(dpq - dqp));
    rep.max_triangle_violation = std::max(rep.max_triangle_violation, dpq - dpr - drq);
  }
  return rep;
}

double pinsker_gap(VecRef p, VecRef q) {
  const double kl = kl_divergence(p, q);
  const double l1 = l1_distance(p, q);
  return kl - 0.5 * l1 * l1;
}

Eigen::VectorXd sample_simplex(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.exponential();
  return v / v.sum();
}

void validate_prob_vec(VecRef v) {
  if (v.size() < 2) throw std::invalid_argument("prob vec: need L >= 2");
  if (v.minCoeff() < 0.0) throw std::invalid_argument("prob vec: negative entry");
  if (std::abs(v.sum() - 1.0) > 1e-9) throw std::invalid_argument("prob vec: entries do not sum to 1");
}

}  // namespace scorelab::simplex
