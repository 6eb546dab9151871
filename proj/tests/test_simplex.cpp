#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "scorelab/simplex.hpp"

using namespace scorelab;
using namespace scorelab::simplex;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Interior pair: away from the kinks of |.| and max|.|, with coordinates
// bounded away from zero and (for the sqrt-composed JS distance) divergence
// large enough that the step-1e-5 central difference is itself accurate to
// the tolerance under test.
std::pair<Eigen::VectorXd, Eigen::VectorXd> interior_pair(const MetricSpec& spec, int dim,
                                                          Rng& rng, double margin = 1e-4) {
  for (;;) {
    Eigen::VectorXd p = sample_simplex(dim, rng);
    Eigen::VectorXd q = sample_simplex(dim, rng);
    if (p.minCoeff() < 0.02 || q.minCoeff() < 0.02) continue;
    const Eigen::VectorXd d = (p - q).cwiseAbs();
    if (d.minCoeff() < margin || d.norm() < 0.05) continue;
    if (dim > 2) {  // unique Linf argmax
      double top = 0.0, second = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (d[i] > top) {
          second = top;
          top = d[i];
        } else if (d[i] > second) {
          second = d[i];
        }
      }
      if (top - second < margin) continue;
    }
    if (spec.base == Base::JSdist && js_divergence(p, q) < 0.1) continue;
    return {p, q};
  }
}

const std::vector<MetricSpec> kAllSpecs = {
    MetricSpec(Base::L1),     MetricSpec(Base::L2), MetricSpec(Base::Linf),
    MetricSpec(Base::JSdist), MetricSpec(Base::KL), MetricSpec(Base::JSdiv),
    MetricSpec(Base::SE),     MetricSpec(Base::SqL1)};

}  // namespace

TEST_SUITE_BEGIN("simplex");

TEST_CASE("spec normalization and flags") {
  const MetricSpec se(Base::SE);
  CHECK(se.base == Base::L2);
  CHECK(se.phi == Phi::Square);
  CHECK_FALSE(se.is_distance_metric());
  const MetricSpec sql1(Base::SqL1);
  CHECK(sql1.base == Base::L1);
  CHECK(sql1.phi == Phi::Square);

  CHECK(MetricSpec(Base::L1).is_distance_metric());
  CHECK(MetricSpec(Base::L2).is_distance_metric());
  CHECK(MetricSpec(Base::Linf).is_distance_metric());
  CHECK(MetricSpec(Base::JSdist).is_distance_metric());
  CHECK_FALSE(MetricSpec(Base::KL).is_distance_metric());
  CHECK_FALSE(MetricSpec(Base::JSdiv).is_distance_metric());
  CHECK_FALSE(MetricSpec(Base::L2, Phi::Square).is_distance_metric());

  CHECK_THROWS_AS(MetricSpec(Base::SE, Phi::Square), std::invalid_argument);
  CHECK(MetricSpec(Base::SE) == MetricSpec(Base::L2, Phi::Square));

  for (const auto& s : kAllSpecs) CHECK(MetricSpec::parse(s.name()) == s);
}

TEST_CASE("eval closed-form examples") {
  const auto e0 = vec2(1, 0), e1 = vec2(0, 1), u = vec2(0.5, 0.5);
  CHECK(eval(MetricSpec(Base::L1), e0, e1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eval(MetricSpec(Base::KL), u, u) == 0.0);
  CHECK(eval(MetricSpec(Base::KL), e0, u) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
  CHECK(eval(MetricSpec(Base::SE), e0, e1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("identity of indiscernibles is exact for every base") {
  Rng rng(7);
  for (int dim : {2, 3, 5}) {
    for (int t = 0; t < 50; ++t) {
      const Eigen::VectorXd p = sample_simplex(dim, rng);
      for (const auto& spec : kAllSpecs) CHECK(eval(spec, p, p) == 0.0);
    }
  }
}

TEST_CASE("js divergence bounded by ln 2 and jsdist is its square root") {
  Rng rng(11);
  const MetricSpec jsd(Base::JSdiv), jsm(Base::JSdist);
  for (int t = 0; t < 2000; ++t) {
    const Eigen::VectorXd p = sample_simplex(3, rng);
    const Eigen::VectorXd q = sample_simplex(3, rng);
    const double js = eval(jsd, p, q);
    CHECK(js <= std::numbers::ln2 + 1e-12);
    CHECK(eval(jsm, p, q) == std::sqrt(js));
  }
  CHECK(eval(jsd, vec2(1, 0), vec2(0, 1)) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
}

TEST_CASE("grad_q closed-form examples") {
  const Eigen::VectorXd u = vec2(0.5, 0.5);
  const Eigen::VectorXd g_se = grad_q(MetricSpec(Base::SE), u, u);
  CHECK(g_se[0] == 0.0);
  CHECK(g_se[1] == 0.0);
  const Eigen::VectorXd p = vec2(0.3, 0.7);
  const Eigen::VectorXd g_kl = grad_q(MetricSpec(Base::KL), p, p);
  CHECK(g_kl[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(g_kl[1] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("grad_q and grad_p match central finite differences") {
  Rng rng(23);
  for (const auto& spec : kAllSpecs) {
    for (int dim : {2, 3, 5}) {
      if (spec.base == Base::Linf && dim == 2) continue;  // every pair ties at L=2
      const int trials = dim == 3 ? 120 : 60;
      for (int t = 0; t < trials; ++t) {
        const auto [p, q] = interior_pair(spec, dim, rng);
        const Eigen::VectorXd gq = grad_q(spec, p, q);
        const Eigen::VectorXd fd_q =
            oracles::central_grad([&](const Eigen::VectorXd& qq) { return eval(spec, p, qq); }, q);
        const Eigen::VectorXd gp = grad_p(spec, p, q);
        const Eigen::VectorXd fd_p =
            oracles::central_grad([&](const Eigen::VectorXd& pp) { return eval(spec, pp, q); }, p);
        for (Eigen::Index i = 0; i < dim; ++i) {
          CHECK_MESSAGE(oracles::close(gq[i], fd_q[i], 1e-6, 1e-7),
                        spec.name() << " grad_q dim=" << dim << " got " << gq[i] << " fd " << fd_q[i]);
          CHECK_MESSAGE(oracles::close(gp[i], fd_p[i], 1e-6, 1e-7),
                        spec.name() << " grad_p dim=" << dim << " got " << gp[i] << " fd " << fd_p[i]);
        }
      }
    }
  }
}

TEST_CASE("metric axioms hold for distance metrics and fail for KL") {
  for (const Base b : {Base::L1, Base::L2, Base::Linf, Base::JSdist}) {
    const AxiomReport rep = check_axioms(MetricSpec(b), 10000, 99);
    CHECK(rep.max_symmetry_violation <= 1e-9);
    CHECK(rep.max_triangle_violation <= 1e-9);
    CHECK(rep.max_negativity <= 1e-9);
  }
  const AxiomReport kl = check_axioms(MetricSpec(Base::KL), 10000, 99);
  CHECK(kl.max_symmetry_violation > 0.0);
}

TEST_CASE("pinsker gap") {
  CHECK(pinsker_gap(vec2(0.5, 0.5), vec2(0.5, 0.5)) == 0.0);
  CHECK(pinsker_gap(vec2(1, 0), vec2(0.5, 0.5)) ==
        doctest::Approx(std::numbers::ln2 - 0.5).epsilon(1e-14));
  Rng rng(5);
  double min_gap = 1e300;
  for (int t = 0; t < 10000; ++t) {
    const Eigen::VectorXd p = sample_simplex(3, rng);
    const Eigen::VectorXd q = sample_simplex(3, rng);
    min_gap = std::min(min_gap, pinsker_gap(p, q));
  }
  CHECK(min_gap >= -1e-12);
}

TEST_CASE("infinite divergence and dimension errors") {
  CHECK_THROWS_AS(eval(MetricSpec(Base::KL), vec2(0.3, 0.7), vec2(1.0, 0.0)), InfiniteDivergence);
  CHECK_THROWS_AS(pinsker_gap(vec2(0.3, 0.7), vec2(1.0, 0.0)), InfiniteDivergence);
  Eigen::VectorXd p3(3);
  p3 << 0.2, 0.3, 0.5;
  CHECK_THROWS_AS(eval(MetricSpec(Base::L1), p3, vec2(0.5, 0.5)), std::invalid_argument);
  // KL with matching zero entries stays finite.
  CHECK(eval(MetricSpec(Base::KL), vec2(1, 0), vec2(1, 0)) == 0.0);
}

TEST_CASE("prob vec validation") {
  CHECK_NOTHROW(validate_prob_vec(vec2(0.4, 0.6)));
  CHECK_THROWS_AS(validate_prob_vec(vec2(-0.1, 1.1)), std::invalid_argument);
  CHECK_THROWS_AS(validate_prob_vec(vec2(0.4, 0.55)), std::invalid_argument);
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK_THROWS_AS(validate_prob_vec(one), std::invalid_argument);
}

TEST_CASE("linf tie convention at L=2") {
  // Both coordinates tie on the binary simplex (exactly representable
  // values here); the convention puts the whole gradient on index 0.
  const Eigen::VectorXd g = grad_q(MetricSpec(Base::Linf), vec2(0.75, 0.25), vec2(0.5, 0.5));
  CHECK(g[0] == -1.0);
  CHECK(g[1] == 0.0);
}

TEST_SUITE_END();
