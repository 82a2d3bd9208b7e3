// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_NETWORK_H_
#define MNN_NETWORK_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mnn/common.h"

namespace mnn {

// Tag values are the on-disk codes of the model format.
enum class Activation : std::uint8_t {
  kModifiedRelu = 0,  // max(a, 0) with slope 0.01 below zero
  kLogistic = 1,
  kIdentity = 2,
};

inline constexpr double kReluLeak = 0.01;

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

// One dense layer. weight is K_out x (K_in + 1); the last column is the bias.
struct Layer {
  RealMatrix weight;
  Activation activation = Activation::kModifiedRelu;

  Eigen::Index input_dim() const { return weight.cols() - 1; }
  Eigen::Index output_dim() const { return weight.rows(); }
};

// Dense feedforward network. Immutable once built; training produces a new
// value.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  std::size_t depth() const { return layers_.size(); }
  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;

  // Unit counts [K1, K2, ..., K_out].
  std::vector<int> dims() const;

  bool operator==(const Network& other) const;

 private:
  std::vector<Layer> layers_;
};

enum class DropoutMode { kOff, kScaled, kSampled };

// keep_prob[l] gates the input of layer l (index 0 corrupts the network
// input). Missing entries mean "keep everything".
struct DropoutSpec {
  std::vector<double> keep_prob;
  DropoutMode mode = DropoutMode::kOff;
  std::uint64_t seed = 0;

  double keep(std::size_t layer) const {
    return layer < keep_prob.size() ? keep_prob[layer] : 1.0;
  }
};

void validate(const DropoutSpec& d);

// Realized per-layer multipliers for a batch: entry l is B x K_l, or empty
// when layer l's input is left untouched.
struct DropoutMasks {
  std::vector<RealMatrix> layer;
};

DropoutMasks draw_masks(const Network& net, const DropoutSpec& drop,
                        Eigen::Index batch, Rng& rng);

// Activations of every layer for a batch: z[0] is the (masked) input row
// block, z[L] the network output. pre[l] holds the pre-activation of layer l.
struct ForwardTrace {
  std::vector<RealMatrix> z;
  std::vector<RealMatrix> pre;

  const RealMatrix& output() const { return z.back(); }
};

// Batch feedforward; each row of `inputs` is one sample.
ForwardTrace forward(const Network& net, const RealMatrix& inputs,
                     const DropoutMasks& masks = {});

// Single-vector feedforward. In sampled mode the masks are drawn from `rng`.
RealVector feedforward(const Network& net, const RealVector& x,
                       const DropoutSpec& drop, Rng& rng);
RealVector feedforward(const Network& net, const RealVector& x);

// Batch inference without dropout.
RealMatrix infer(const Network& net, const RealMatrix& inputs);

struct Gradients {
  std::vector<RealMatrix> weight;
};

struct LossAndGradients {
  double loss = 0.0;  // sum of squared errors over the batch
  Gradients grads;    // d loss / d W, summed over the batch
};

// Sum-of-squared-error loss and exact gradients for the given masks (the
// same masks are used in the forward and backward pass).
LossAndGradients backprop(const Network& net, const RealMatrix& inputs,
                          const RealMatrix& targets,
                          const DropoutMasks& masks = {});
LossAndGradients backprop(const Network& net, const RealVector& x,
                          const RealVector& target,
                          const DropoutMasks& masks = {});

// Scaled-uniform init with variance 2 / fan_in, zero biases. Weights are
// rounded to float32 so the network round-trips through the model format.
// `activations` has one entry per layer (dims.size() - 1).
Network init_weights(const std::vector<int>& dims,
                     const std::vector<Activation>& activations,
                     std::uint64_t seed);

// Multiplies each layer's input columns by keep_prob[l], producing a network
// whose dropout-off output equals the original network's `scaled` output.
Network fold_dropout(const Network& net, const DropoutSpec& drop);

// Rounds all weights to the nearest float32.
Network quantize_to_float(const Network& net);

}  // namespace mnn

#endif  // MNN_NETWORK_H_
