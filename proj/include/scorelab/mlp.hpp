#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "scorelab/simplex.hpp"

namespace scorelab::mlp {

enum class Activation { Tanh, ReLU };

// Gradients of a scalar loss with respect to the flat parameter vector and
// the scalar input.
struct GradPack {
  Eigen::VectorXd d_params;
  double d_input = 0.0;
};

// Scalar-input binary classifier: dense layers, sigmoid head, output
// probability clamped into [prob_floor, 1 - prob_floor] so KL terms stay
// finite. The clamp contributes zero gradient while active.
class MlpModel {
 public:
  MlpModel() = default;

  // Fan-in-scaled symmetric uniform init, deterministic under seed.
  // layer_sizes must start and end with 1.
  static MlpModel init(const std::vector<int>& layer_sizes, Activation act, std::uint64_t seed);

  // (1 - eta_hat, eta_hat) at x.
  Eigen::Vector2d prob(double x) const;

  // d/dx of both output components; (-g, g) with g = d eta_hat / dx.
  Eigen::Vector2d prob_input_grad(double x) const;

  // upstream = d loss / d prob(x). Exact reverse-mode gradients.
  GradPack backward(double x, const Eigen::Vector2d& upstream) const;

  int param_count() const;
  // Flat layout: per layer, weights row by row, then biases.
  Eigen::VectorXd params() const;
  void set_params(simplex::VecRef flat);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation activation() const { return act_; }
  double prob_floor() const { return prob_floor_; }
  void set_prob_floor(double f);

  nlohmann::json to_json() const;
  static MlpModel from_json(const nlohmann::json& j);

 private:
  struct Trace;
  Trace run_forward(double x) const;

  std::vector<int> sizes_;
  Activation act_ = Activation::Tanh;
  double prob_floor_ = 1e-7;
  std::vector<Eigen::MatrixXd> w_;
  std::vector<Eigen::VectorXd> b_;
};

// Sum over labels of d p(y|x)/dx; identically zero away from the clamp
// because the two outputs always sum to one.
double prob_grad_sum_zero(const MlpModel& model, double x);

}  // namespace scorelab::mlp
