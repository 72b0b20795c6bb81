#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfpp/random.hpp"

namespace cfpp {

// Dense multilayer perceptron, tanh hidden activations, identity output.
// Weights are row-major [out x in] per layer.
struct Mlp {
  std::vector<int> widths;
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  int num_layers() const { return static_cast<int>(widths.size()) - 1; }
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  size_t param_count() const;

  // Glorot-uniform initialization from a seeded generator.
  static Mlp create(std::vector<int> widths, Rng& rng);
  static Mlp zeros(std::vector<int> widths);
};

struct ForwardCache {
  // acts[0] is the input; acts[l] the post-activation output of layer l.
  std::vector<std::vector<double>> acts;
};

std::vector<double> forward(const Mlp& net, std::span<const double> input,
                            ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;
  std::vector<double> input;
};

Gradients zero_gradients(const Mlp& net);

// Reverse-mode gradients of (output . upstream) w.r.t. all parameters and the
// input, accumulated into grads.
void backward_accumulate(const Mlp& net, const ForwardCache& cache,
                         std::span<const double> upstream, Gradients& grads);
Gradients backward(const Mlp& net, const ForwardCache& cache, std::span<const double> upstream);

void scale_gradients(Gradients& grads, double factor);

std::vector<double> flatten_params(const Mlp& net);
void unflatten_params(Mlp& net, std::span<const double> flat);
std::vector<double> flatten_gradients(const Mlp& net, const Gradients& grads);

struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  static AdamState for_size(size_t n, double lr = 3e-4);
};

// Standard Adam with bias correction on a flat parameter vector.
void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state);
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

// Worst parameter-wise relative error of backward against central finite
// differences of loss(forward(input)).
double grad_check(const Mlp& net, std::span<const double> input,
                  const std::function<double(std::span<const double>)>& loss, double h = 1e-5);

nlohmann::json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace cfpp
