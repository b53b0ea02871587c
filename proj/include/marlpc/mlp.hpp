#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "marlpc/rng.hpp"

namespace marlpc {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1, Sigmoid = 2 };

// Plain fully connected network. weights[l] is (dims[l+1] x dims[l]); all
// hidden layers share one activation, the last layer has its own.
struct Mlp {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Activation hidden = Activation::Relu;
  Activation output = Activation::Identity;

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  std::vector<int> layer_dims() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;  // columns are samples
  Eigen::VectorXd forward1(const Eigen::VectorXd& input) const;
};

// Symmetric uniform init scaled by 1/sqrt(fan-in).
Mlp make_mlp(const std::vector<int>& dims, Activation hidden, Activation output, RngStream& rng);

struct MlpTrace {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[L] = output
};

MlpTrace forward_trace(const Mlp& net, const Eigen::MatrixXd& inputs);

struct MlpGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  void match_shape(const Mlp& net);
};

// Reverse-mode gradients of the forward map. `upstream` is dL/d(output),
// (out x batch); gradients are written into `grads` and dL/d(input) returned.
Eigen::MatrixXd backward(const Mlp& net, const MlpTrace& trace, const Eigen::MatrixXd& upstream,
                         MlpGrads& grads);

// Adaptive moment estimation; `direction` +1 ascends, -1 descends.
struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void match_shape(const Mlp& net);
};

void adam_update(Mlp& net, const MlpGrads& grads, AdamState& state, double lr, double direction);

// Binary checkpoint: self-describing header (magic, version, activations,
// layer dims, issue slot) followed by a flat little-endian f64 payload,
// row-major weights then biases per layer. Byte layout documented in README.
void save_checkpoint(const Mlp& net, const std::filesystem::path& path, std::uint64_t issued_slot = 0);
Mlp load_checkpoint(const std::filesystem::path& path, std::uint64_t* issued_slot = nullptr);

}  // namespace marlpc
