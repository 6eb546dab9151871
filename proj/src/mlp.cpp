#include "scorelab/mlp.hpp"

#include <cmath>

#include "scorelab/rng.hpp"

namespace scorelab::mlp {

namespace {

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

double act_fn(Activation a, double z) { return a == Activation::Tanh ? std::tanh(z) : std::max(z, 0.0); }

double act_deriv(Activation a, double z, double out) {
  return a == Activation::Tanh ? 1.0 - out * out : (z > 0.0 ? 1.0 : 0.0);
}

}  // namespace

struct MlpModel::Trace {
  std::vector<Eigen::VectorXd> pre;   // pre-activations per layer
  std::vector<Eigen::VectorXd> post;  // post-activations (post.back() holds the logit)
  double eta_raw = 0.5;
  double eta = 0.5;
  bool clamped = false;
};

MlpModel MlpModel::init(const std::vector<int>& layer_sizes, Activation act, std::uint64_t seed) {
  if (layer_sizes.size() < 2 || layer_sizes.front() != 1 || layer_sizes.back() != 1)
    throw std::invalid_argument("MlpModel::init: layer sizes must run from 1 to 1");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("MlpModel::init: layer sizes must be >= 1");

  MlpModel m;
  m.sizes_ = layer_sizes;
  m.act_ = act;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    Eigen::VectorXd b(fan_out);
    for (int r = 0; r < fan_out; ++r) b[r] = rng.uniform(-bound, bound);
    m.w_.push_back(std::move(w));
    m.b_.push_back(std::move(b));
  }
  return m;
}

MlpModel::Trace MlpModel::run_forward(double x) const {
  Trace t;
  Eigen::VectorXd a = Eigen::VectorXd::Constant(1, x);
  const std::size_t layers = w_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::VectorXd z = w_[l] * a + b_[l];
    t.pre.push_back(z);
    if (l + 1 < layers) {
      a.resize(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = act_fn(act_, z[i]);
      t.post.push_back(a);
    } else {
      t.post.push_back(z);  // output logit, no hidden activation
    }
  }
  t.eta_raw = sigmoid(t.pre.back()[0]);
  t.eta = std::clamp(t.eta_raw, prob_floor_, 1.0 - prob_floor_);
  t.clamped = t.eta != t.eta_raw;
  return t;
}

Eigen::Vector2d MlpModel::prob(double x) const {
  const Trace t = run_forward(x);
  return {1.0 - t.eta, t.eta};
}

Eigen::Vector2d MlpModel::prob_input_grad(double x) const {
  const GradPack g = backward(x, Eigen::Vector2d(0.0, 1.0));
  return {-g.d_input, g.d_input};
}

GradPack MlpModel::backward(double x, const Eigen::Vector2d& upstream) const {
  const Trace t = run_forward(x);
  const std::size_t layers = w_.size();

  GradPack out;
  out.d_params = Eigen::VectorXd::Zero(param_count());

  // d loss / d logit through the sigmoid; zero while the clamp is active.
  const double d_eta = upstream[1] - upstream[0];
  double delta_scalar = t.clamped ? 0.0 : d_eta * t.eta_raw * (1.0 - t.eta_raw);

  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, delta_scalar);
  const Eigen::VectorXd x_vec = Eigen::VectorXd::Constant(1, x);
  Eigen::Index offset = out.d_params.size();
  for (std::size_t li = layers; li-- > 0;) {
    const Eigen::VectorXd& input = (li == 0) ? x_vec : t.post[li - 1];
    const Eigen::Index wn = w_[li].size();
    const Eigen::Index bn = b_[li].size();
    offset -= wn + bn;

    // Weights are stored row-major in the flat vector.
    for (Eigen::Index r = 0; r < w_[li].rows(); ++r)
      for (Eigen::Index c = 0; c < w_[li].cols(); ++c)
        out.d_params[offset + r * w_[li].cols() + c] = delta[r] * input[c];
    out.d_params.segment(offset + wn, bn) = delta;

    Eigen::VectorXd d_input_vec = w_[li].transpose() * delta;
    if (li == 0) {
      out.d_input = d_input_vec[0];
    } else {
      const Eigen::VectorXd& z = t.pre[li - 1];
      const Eigen::VectorXd& a = t.post[li - 1];
      delta.resize(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i)
        delta[i] = d_input_vec[i] * act_deriv(act_, z[i], a[i]);
    }
  }
  return out;
}

int MlpModel::param_count() const {
  int n = 0;
  for (std::size_t l = 0; l < w_.size(); ++l)
    n += static_cast<int>(w_[l].size() + b_[l].size());
  return n;
}

Eigen::VectorXd MlpModel::params() const {
  Eigen::VectorXd flat(param_count());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    for (Eigen::Index r = 0; r < w_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < w_[l].cols(); ++c) flat[k++] = w_[l](r, c);
    flat.segment(k, b_[l].size()) = b_[l];
    k += b_[l].size();
  }
  return flat;
}

void MlpModel::set_params(simplex::VecRef flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("set_params: flat vector length does not match the model");
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    for (Eigen::Index r = 0; r < w_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < w_[l].cols(); ++c) w_[l](r, c) = flat[k++];
    b_[l] = flat.segment(k, b_[l].size());
    k += b_[l].size();
  }
}

void MlpModel::set_prob_floor(double f) {
  if (!(f > 0.0 && f < 0.5)) throw std::invalid_argument("prob_floor must lie in (0, 0.5)");
  prob_floor_ = f;
}

nlohmann::json MlpModel::to_json() const {
  nlohmann::json j;
  j["layer_sizes"] = sizes_;
  j["activation"] = act_ == Activation::Tanh ? "tanh" : "relu";
  j["prob_floor"] = prob_floor_;
  const Eigen::VectorXd flat = params();
  j["params"] = std::vector<double>(flat.data(), flat.data() + flat.size());
  return j;
}

MlpModel MlpModel::from_json(const nlohmann::json& j) {
  MlpModel m = init(j.at("layer_sizes").get<std::vector<int>>(),
                    j.at("activation").get<std::string>() == "relu" ? Activation::ReLU : Activation::Tanh,
                    0);
  m.set_prob_floor(j.value("prob_floor", 1e-7));
  const auto p = j.at("params").get<std::vector<double>>();
  m.set_params(Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
  return m;
}

double prob_grad_sum_zero(const MlpModel& model, double x) {
  const Eigen::Vector2d g = model.prob_input_grad(x);
  return g[0] + g[1];
}

}  // namespace scorelab::mlp
