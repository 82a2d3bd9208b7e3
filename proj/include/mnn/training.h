// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_TRAINING_H_
#define MNN_TRAINING_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnn/data.h"
#include "mnn/network.h"
#include "mnn/signal.h"

namespace mnn {

// Resilient backpropagation hyperparameters (iRprop-).
struct RpropConfig {
  double eta_minus = 0.5;
  double eta_plus = 1.5;
  double step_min = 1e-7;
  double step_max = 1e-1;
  double initial_step = 1e-3;
  int iterations = 5000;
  int batch_size = 1000;
};

void validate(const RpropConfig& cfg);

struct TrainPair {
  RealVector input;
  RealVector target;
};

// Training pairs stored row-wise: row i of `inputs` pairs with row i of
// `targets`.
struct Dataset {
  RealMatrix inputs;
  RealMatrix targets;

  Eigen::Index size() const { return inputs.rows(); }
  TrainPair pair(Eigen::Index i) const {
    return {inputs.row(i).transpose(), targets.row(i).transpose()};
  }
  void append(const Dataset& other);
};

// |s| / |x| clipped to [0, 1]; bins with |x| < 1e-10 get 0.
MaskMatrix mask_targets(const Spectrogram& clean, const Spectrogram& mixture);

// One (clean, noise, SNR) triple per utterance.
struct DenoiserExample {
  Waveform clean;
  Waveform noise;
  double snr_db = 0.0;
};

// Mixes each example, then pairs the context-stacked mixture magnitudes with
// the mask of the center frame.
Dataset build_denoiser_dataset(const std::vector<DenoiserExample>& examples,
                               int context, int frame_size = 1024,
                               int hop = 256);

// Same, from already-mixed (clean, mixture) waveforms.
Dataset denoiser_pairs(const Waveform& clean, const Waveform& mixture,
                       int context, int frame_size, int hop);

// Inputs are context-stacked clean magnitudes, targets the center frame.
Dataset build_dae_dataset(const std::vector<Waveform>& cleans, int context,
                          int frame_size = 1024, int hop = 256);

struct RpropState {
  std::vector<RealMatrix> step;
  std::vector<RealMatrix> prev_grad;

  static RpropState initial(const Network& net, const RpropConfig& cfg);
};

// One iRprop- update: repeated gradient sign grows the step (capped at
// step_max); a sign flip shrinks it (floored at step_min) and skips the
// update for that weight. Throws NumericError on a non-finite gradient.
void rprop_step(RpropState& state, const Gradients& grads, Network& net,
                const RpropConfig& cfg);

struct TrainResult {
  Network network;
  std::vector<double> loss_curve;  // mean per-pair SSE, one per iteration
};

using ProgressFn = std::function<void(int iteration, double mean_loss)>;

// Seeded mini-batch Rprop. Each iteration takes the next batch_size pairs
// of a per-epoch shuffled order (wrapping into a fresh shuffle), draws
// dropout masks, sums the batch gradient and applies one rprop_step. The
// returned network is rounded to float32.
TrainResult train(const Network& init, const Dataset& data,
                  const RpropConfig& cfg, const DropoutSpec& drop,
                  std::uint64_t seed, const ProgressFn& progress = {});

// Network ready for dropout-free inference: dropout folded into the weights
// and rounded to float32.
Network inference_network(const Network& trained, const DropoutSpec& drop);

// What a model is trained for; decides defaults for activations.
enum class ModelRole { kDenoiser, kAutoencoder };

// The training recipe carried in manifests and experiment plans.
struct TrainConfig {
  int frame_size = 1024;
  int hop = 256;
  int context = 3;
  std::vector<int> dims;  // full unit counts, input first
  std::vector<Activation> activations;
  RpropConfig rprop;
  DropoutSpec dropout;
  std::uint64_t seed = 0;
};

// Parses a config block. Missing fields take role-specific defaults:
// hidden modified-relu layers, logistic output for denoisers and
// modified-relu output for autoencoders, dropout keep 0.8 on every layer.
TrainConfig train_config_from_json(const nlohmann::json& j, ModelRole role);
nlohmann::json train_config_to_json(const TrainConfig& c);

// Checks dims against the framing: input = context * bins, output = bins.
void validate(const TrainConfig& c);

std::string loss_curve_csv(const std::vector<double>& curve);

}  // namespace mnn

#endif  // MNN_TRAINING_H_
