#include "marlpc/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "marlpc/errors.hpp"

namespace marlpc {

namespace {

void apply_activation(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::Identity:
      break;
    case Activation::Relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::Sigmoid:
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
  }
}

// derivative expressed through the post-activation value
void apply_activation_grad(Eigen::MatrixXd& delta, const Eigen::MatrixXd& activated,
                           Activation act) {
  switch (act) {
    case Activation::Identity:
      break;
    case Activation::Relu:
      delta.array() *= (activated.array() > 0.0).cast<double>();
      break;
    case Activation::Sigmoid:
      delta.array() *= activated.array() * (1.0 - activated.array());
      break;
  }
}

}  // namespace

std::vector<int> Mlp::layer_dims() const {
  std::vector<int> dims;
  dims.push_back(input_dim());
  for (const auto& w : weights) dims.push_back(static_cast<int>(w.rows()));
  return dims;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::MatrixXd z = (weights[l] * a).colwise() + biases[l];
    apply_activation(z, l + 1 == weights.size() ? output : hidden);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd Mlp::forward1(const Eigen::VectorXd& input) const { return forward(input); }

Mlp make_mlp(const std::vector<int>& dims, Activation hidden, Activation output, RngStream& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output dims");
  Mlp net;
  net.hidden = hidden;
  net.output = output;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    Eigen::VectorXd b(dims[l + 1]);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-scale, scale);
    for (int r = 0; r < b.size(); ++r) b(r) = rng.uniform(-scale, scale);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

MlpTrace forward_trace(const Mlp& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim())
    throw std::invalid_argument("forward_trace: input dimension mismatch");
  MlpTrace trace;
  trace.acts.reserve(net.weights.size() + 1);
  trace.acts.push_back(inputs);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Eigen::MatrixXd z = (net.weights[l] * trace.acts.back()).colwise() + net.biases[l];
    apply_activation(z, l + 1 == net.weights.size() ? net.output : net.hidden);
    trace.acts.push_back(std::move(z));
  }
  return trace;
}

void MlpGrads::match_shape(const Mlp& net) {
  w.resize(net.weights.size());
  b.resize(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    w[l].setZero(net.weights[l].rows(), net.weights[l].cols());
    b[l].setZero(net.biases[l].size());
  }
}

Eigen::MatrixXd backward(const Mlp& net, const MlpTrace& trace, const Eigen::MatrixXd& upstream,
                         MlpGrads& grads) {
  const auto layers = static_cast<int>(net.weights.size());
  if (upstream.rows() != net.output_dim() || upstream.cols() != trace.acts.back().cols())
    throw std::invalid_argument("backward: upstream shape mismatch");
  grads.match_shape(net);

  Eigen::MatrixXd delta = upstream;
  for (int l = layers - 1; l >= 0; --l) {
    apply_activation_grad(delta, trace.acts[l + 1], l + 1 == layers ? net.output : net.hidden);
    grads.w[l] = delta * trace.acts[l].transpose();
    grads.b[l] = delta.rowwise().sum();
    delta = net.weights[l].transpose() * delta;
  }
  return delta;  // dL/d(input)
}

void AdamState::match_shape(const Mlp& net) {
  mw.resize(net.weights.size());
  vw.resize(net.weights.size());
  mb.resize(net.biases.size());
  vb.resize(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    mw[l].setZero(net.weights[l].rows(), net.weights[l].cols());
    vw[l].setZero(net.weights[l].rows(), net.weights[l].cols());
    mb[l].setZero(net.biases[l].size());
    vb[l].setZero(net.biases[l].size());
  }
}

void adam_update(Mlp& net, const MlpGrads& grads, AdamState& state, double lr, double direction) {
  if (state.mw.empty()) state.match_shape(net);
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double rate = direction * lr;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    state.mw[l] = state.beta1 * state.mw[l] + (1 - state.beta1) * grads.w[l];
    state.vw[l] = state.beta2 * state.vw[l] + (1 - state.beta2) * grads.w[l].cwiseProduct(grads.w[l]);
    net.weights[l].array() +=
        rate * (state.mw[l].array() / bc1) / ((state.vw[l].array() / bc2).sqrt() + state.eps);
    state.mb[l] = state.beta1 * state.mb[l] + (1 - state.beta1) * grads.b[l];
    state.vb[l] =
        state.beta2 * state.vb[l] + (1 - state.beta2) * grads.b[l].cwiseProduct(grads.b[l]);
    net.biases[l].array() +=
        rate * (state.mb[l].array() / bc1) / ((state.vb[l].array() / bc2).sqrt() + state.eps);
  }
}

namespace {

constexpr char kMagic[8] = {'M', 'L', 'P', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError(std::string("checkpoint truncated while reading ") + what);
  return value;
}

}  // namespace

void save_checkpoint(const Mlp& net, const std::filesystem::path& path, std::uint64_t issued_slot) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, issued_slot);
  write_pod(out, static_cast<std::uint8_t>(net.hidden));
  write_pod(out, static_cast<std::uint8_t>(net.output));
  const auto dims = net.layer_dims();
  write_pod(out, static_cast<std::uint32_t>(net.weights.size()));
  for (int d : dims) write_pod(out, static_cast<std::uint32_t>(d));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) write_pod(out, w(r, c));  // row-major
    for (int r = 0; r < net.biases[l].size(); ++r) write_pod(out, net.biases[l](r));
  }
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Mlp load_checkpoint(const std::filesystem::path& path, std::uint64_t* issued_slot) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a policy checkpoint: " + path.string());
  const auto version = read_pod<std::uint32_t>(in, "version");
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto slot = read_pod<std::uint64_t>(in, "issue slot");
  if (issued_slot) *issued_slot = slot;

  Mlp net;
  net.hidden = static_cast<Activation>(read_pod<std::uint8_t>(in, "hidden activation"));
  net.output = static_cast<Activation>(read_pod<std::uint8_t>(in, "output activation"));
  const auto layers = read_pod<std::uint32_t>(in, "layer count");
  if (layers == 0 || layers > 64) throw IoError("implausible checkpoint layer count");
  std::vector<int> dims(layers + 1);
  for (auto& d : dims) {
    d = static_cast<int>(read_pod<std::uint32_t>(in, "layer dims"));
    if (d <= 0) throw IoError("non-positive layer dimension in checkpoint");
  }
  for (std::uint32_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd w(dims[l + 1], dims[l]);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = read_pod<double>(in, "weights");
    Eigen::VectorXd b(dims[l + 1]);
    for (int r = 0; r < b.size(); ++r) b(r) = read_pod<double>(in, "biases");
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  // must be exactly at EOF
  in.peek();
  if (!in.eof()) throw IoError("trailing bytes in checkpoint: " + path.string());
  return net;
}

}  // namespace marlpc
