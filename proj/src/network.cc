// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/network.h"

#include <cmath>
#include <stdexcept>

namespace mnn {
namespace {

void activate(Activation a, const RealMatrix& pre, RealMatrix& out) {
  switch (a) {
    case Activation::kModifiedRelu:
      out = pre.unaryExpr([](double v) { return v > 0.0 ? v : kReluLeak * v; });
      return;
    case Activation::kLogistic:
      out = pre.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      return;
    case Activation::kIdentity:
      out = pre;
      return;
  }
  throw std::invalid_argument("unknown activation");
}

// Multiplies `delta` in place by g'(pre).
void scale_by_derivative(Activation a, const RealMatrix& pre,
                         RealMatrix& delta) {
  switch (a) {
    case Activation::kModifiedRelu:
      delta.array() *= pre.unaryExpr([](double v) {
        return v > 0.0 ? 1.0 : kReluLeak;
      }).array();
      return;
    case Activation::kLogistic:
      delta.array() *= pre.unaryExpr([](double v) {
        const double s = 1.0 / (1.0 + std::exp(-v));
        return s * (1.0 - s);
      }).array();
      return;
    case Activation::kIdentity:
      return;
  }
}

void check_masks(const Network& net, const DropoutMasks& masks,
                 Eigen::Index batch) {
  if (masks.layer.empty()) return;
  if (masks.layer.size() != net.depth())
    throw std::invalid_argument("dropout masks: wrong layer count");
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const RealMatrix& m = masks.layer[l];
    if (m.size() == 0) continue;
    if (m.rows() != batch || m.cols() != net.layers()[l].input_dim())
      throw std::invalid_argument("dropout masks: shape mismatch at layer " +
                                  std::to_string(l));
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kModifiedRelu:
      return "modified-relu";
    case Activation::kLogistic:
      return "logistic";
    case Activation::kIdentity:
      return "identity";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "modified-relu") return Activation::kModifiedRelu;
  if (name == "logistic") return Activation::kLogistic;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + std::string(name) +
                              "'");
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("network has no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weight.rows() < 1 || layer.weight.cols() < 2)
      throw std::invalid_argument("layer " + std::to_string(l) +
                                  " has an empty weight matrix");
    if (l > 0 && layers_[l - 1].output_dim() != layer.input_dim())
      throw std::invalid_argument(
          "layer " + std::to_string(l) + " expects " +
          std::to_string(layer.input_dim()) + " inputs but previous layer has " +
          std::to_string(layers_[l - 1].output_dim()) + " outputs");
    if (!layer.weight.allFinite())
      throw std::invalid_argument("layer " + std::to_string(l) +
                                  " has non-finite weights");
  }
}

Eigen::Index Network::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().input_dim();
}

Eigen::Index Network::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().output_dim();
}

std::vector<int> Network::dims() const {
  std::vector<int> d;
  if (layers_.empty()) return d;
  d.push_back(static_cast<int>(input_dim()));
  for (const Layer& l : layers_) d.push_back(static_cast<int>(l.output_dim()));
  return d;
}

bool Network::operator==(const Network& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& a = layers_[l];
    const Layer& b = other.layers_[l];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight)
      return false;
  }
  return true;
}

void validate(const DropoutSpec& d) {
  for (double p : d.keep_prob)
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("dropout keep probability must be in (0, 1]");
}

DropoutMasks draw_masks(const Network& net, const DropoutSpec& drop,
                        Eigen::Index batch, Rng& rng) {
  validate(drop);
  DropoutMasks masks;
  if (drop.mode == DropoutMode::kOff) return masks;
  masks.layer.resize(net.depth());
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const double p = drop.keep(l);
    if (p >= 1.0) continue;
    const Eigen::Index k = net.layers()[l].input_dim();
    RealMatrix& m = masks.layer[l];
    if (drop.mode == DropoutMode::kScaled) {
      m = RealMatrix::Constant(batch, k, p);
    } else {
      m.resize(batch, k);
      for (Eigen::Index i = 0; i < batch; ++i)
        for (Eigen::Index j = 0; j < k; ++j) m(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
    }
  }
  return masks;
}

ForwardTrace forward(const Network& net, const RealMatrix& inputs,
                     const DropoutMasks& masks) {
  if (net.depth() == 0) throw std::invalid_argument("empty network");
  if (inputs.cols() != net.input_dim())
    throw std::invalid_argument("feedforward: input has " +
                                std::to_string(inputs.cols()) +
                                " columns, network expects " +
                                std::to_string(net.input_dim()));
  check_masks(net, masks, inputs.rows());
  const std::size_t depth = net.depth();
  ForwardTrace trace;
  trace.z.resize(depth + 1);
  trace.pre.resize(depth);
  trace.z[0] = inputs;
  for (std::size_t l = 0; l < depth; ++l) {
    if (!masks.layer.empty() && masks.layer[l].size() != 0)
      trace.z[l].array() *= masks.layer[l].array();
    const Layer& layer = net.layers()[l];
    const Eigen::Index k = layer.input_dim();
    RealMatrix& pre = trace.pre[l];
    pre.noalias() = trace.z[l] * layer.weight.leftCols(k).transpose();
    pre.rowwise() += layer.weight.col(k).transpose();
    activate(layer.activation, pre, trace.z[l + 1]);
  }
  return trace;
}

RealVector feedforward(const Network& net, const RealVector& x,
                       const DropoutSpec& drop, Rng& rng) {
  const DropoutMasks masks = draw_masks(net, drop, 1, rng);
  const ForwardTrace trace = forward(net, x.transpose(), masks);
  return trace.output().row(0).transpose();
}

RealVector feedforward(const Network& net, const RealVector& x) {
  return forward(net, x.transpose()).output().row(0).transpose();
}

RealMatrix infer(const Network& net, const RealMatrix& inputs) {
  return std::move(forward(net, inputs).z.back());
}

LossAndGradients backprop(const Network& net, const RealMatrix& inputs,
                          const RealMatrix& targets,
                          const DropoutMasks& masks) {
  const ForwardTrace trace = forward(net, inputs, masks);
  const RealMatrix& out = trace.output();
  if (targets.rows() != out.rows() || targets.cols() != out.cols())
    throw std::invalid_argument("backprop: target is " +
                                std::to_string(targets.rows()) + "x" +
                                std::to_string(targets.cols()) +
                                ", output is " + std::to_string(out.rows()) +
                                "x" + std::to_string(out.cols()));
  LossAndGradients result;
  RealMatrix delta = out - targets;
  result.loss = delta.squaredNorm();
  delta *= 2.0;

  const std::size_t depth = net.depth();
  result.grads.weight.resize(depth);
  for (std::size_t i = depth; i-- > 0;) {
    const Layer& layer = net.layers()[i];
    const Eigen::Index k = layer.input_dim();
    scale_by_derivative(layer.activation, trace.pre[i], delta);
    RealMatrix& g = result.grads.weight[i];
    g.resize(layer.weight.rows(), layer.weight.cols());
    g.leftCols(k).noalias() = delta.transpose() * trace.z[i];
    g.col(k) = delta.colwise().sum().transpose();
    if (i == 0) break;
    RealMatrix upstream = delta * layer.weight.leftCols(k);
    if (!masks.layer.empty() && masks.layer[i].size() != 0)
      upstream.array() *= masks.layer[i].array();
    delta = std::move(upstream);
  }
  return result;
}

LossAndGradients backprop(const Network& net, const RealVector& x,
                          const RealVector& target, const DropoutMasks& masks) {
  return backprop(net, RealMatrix(x.transpose()), RealMatrix(target.transpose()),
                  masks);
}

Network init_weights(const std::vector<int>& dims,
                     const std::vector<Activation>& activations,
                     std::uint64_t seed) {
  if (dims.size() < 2)
    throw std::invalid_argument("init_weights: need at least two layer sizes");
  if (activations.size() != dims.size() - 1)
    throw std::invalid_argument(
        "init_weights: need one activation per layer (" +
        std::to_string(dims.size() - 1) + "), got " +
        std::to_string(activations.size()));
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("init_weights: non-positive size");

  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const double bound = std::sqrt(6.0 / fan_in);  // variance 2 / fan_in
    Layer layer;
    layer.activation = activations[l];
    layer.weight = RealMatrix::Zero(dims[l + 1], fan_in + 1);
    for (int r = 0; r < dims[l + 1]; ++r)
      for (int c = 0; c < fan_in; ++c)
        layer.weight(r, c) =
            static_cast<float>(rng.uniform(-bound, bound));
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

Network fold_dropout(const Network& net, const DropoutSpec& drop) {
  validate(drop);
  std::vector<Layer> layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double p = drop.keep(l);
    if (p < 1.0) layers[l].weight.leftCols(layers[l].input_dim()) *= p;
  }
  return Network(std::move(layers));
}

Network quantize_to_float(const Network& net) {
  std::vector<Layer> layers = net.layers();
  for (Layer& layer : layers)
    layer.weight = layer.weight.cast<float>().cast<double>();
  return Network(std::move(layers));
}

}  // namespace mnn
