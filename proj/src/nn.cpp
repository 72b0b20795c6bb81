#include "cfpp/nn.hpp"

#include <cmath>
#include <fstream>

#include "cfpp/errors.hpp"

namespace cfpp {

size_t Mlp::param_count() const {
  size_t n = 0;
  for (int l = 0; l < num_layers(); ++l) n += w[l].size() + b[l].size();
  return n;
}

Mlp Mlp::create(std::vector<int> widths, Rng& rng) {
  if (widths.size() < 2) throw DomainError("Mlp needs at least one layer");
  Mlp net;
  net.widths = std::move(widths);
  for (int l = 0; l + 1 < static_cast<int>(net.widths.size()); ++l) {
    const int fan_in = net.widths[l];
    const int fan_out = net.widths[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<size_t>(fan_in) * fan_out);
    for (auto& x : w) x = rng.uniform(-bound, bound);
    net.w.push_back(std::move(w));
    net.b.emplace_back(fan_out, 0.0);
  }
  return net;
}

Mlp Mlp::zeros(std::vector<int> widths) {
  Mlp net;
  net.widths = std::move(widths);
  for (int l = 0; l + 1 < static_cast<int>(net.widths.size()); ++l) {
    net.w.emplace_back(static_cast<size_t>(net.widths[l]) * net.widths[l + 1], 0.0);
    net.b.emplace_back(net.widths[l + 1], 0.0);
  }
  return net;
}

std::vector<double> forward(const Mlp& net, std::span<const double> input, ForwardCache* cache) {
  if (static_cast<int>(input.size()) != net.input_dim())
    throw DomainError("forward: input size does not match first layer width");
  std::vector<double> cur(input.begin(), input.end());
  if (cache != nullptr) {
    cache->acts.clear();
    cache->acts.push_back(cur);
  }
  const int layers = net.num_layers();
  for (int l = 0; l < layers; ++l) {
    const int in = net.widths[l];
    const int out = net.widths[l + 1];
    std::vector<double> next(out);
    const double* wl = net.w[l].data();
    for (int o = 0; o < out; ++o) {
      double z = net.b[l][o];
      const double* row = wl + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += row[i] * cur[i];
      next[o] = l + 1 < layers ? std::tanh(z) : z;
    }
    cur = std::move(next);
    if (cache != nullptr) cache->acts.push_back(cur);
  }
  return cur;
}

Gradients zero_gradients(const Mlp& net) {
  Gradients g;
  for (int l = 0; l < net.num_layers(); ++l) {
    g.w.emplace_back(net.w[l].size(), 0.0);
    g.b.emplace_back(net.b[l].size(), 0.0);
  }
  g.input.assign(net.input_dim(), 0.0);
  return g;
}

void backward_accumulate(const Mlp& net, const ForwardCache& cache,
                         std::span<const double> upstream, Gradients& grads) {
  const int layers = net.num_layers();
  if (static_cast<int>(cache.acts.size()) != layers + 1)
    throw DomainError("backward: cache does not match network depth");
  if (static_cast<int>(upstream.size()) != net.output_dim())
    throw DomainError("backward: upstream size does not match output width");

  std::vector<double> delta(upstream.begin(), upstream.end());
  for (int l = layers - 1; l >= 0; --l) {
    const int in = net.widths[l];
    const int out = net.widths[l + 1];
    const std::vector<double>& a_prev = cache.acts[l];
    double* gw = grads.w[l].data();
    const double* wl = net.w[l].data();
    std::vector<double> da_prev(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      grads.b[l][o] += d;
      double* grow = gw + static_cast<size_t>(o) * in;
      const double* wrow = wl + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) {
        grow[i] += d * a_prev[i];
        da_prev[i] += d * wrow[i];
      }
    }
    if (l > 0) {
      // tanh' = 1 - a^2 on the previous hidden activation
      for (int i = 0; i < in; ++i) {
        const double act = cache.acts[l][i];
        da_prev[i] *= 1.0 - act * act;
      }
      delta = std::move(da_prev);
    } else {
      for (int i = 0; i < in; ++i) grads.input[i] += da_prev[i];
    }
  }
}

Gradients backward(const Mlp& net, const ForwardCache& cache, std::span<const double> upstream) {
  Gradients g = zero_gradients(net);
  backward_accumulate(net, cache, upstream, g);
  return g;
}

void scale_gradients(Gradients& grads, double factor) {
  for (auto& layer : grads.w)
    for (auto& x : layer) x *= factor;
  for (auto& layer : grads.b)
    for (auto& x : layer) x *= factor;
  for (auto& x : grads.input) x *= factor;
}

std::vector<double> flatten_params(const Mlp& net) {
  std::vector<double> flat;
  flat.reserve(net.param_count());
  for (int l = 0; l < net.num_layers(); ++l) {
    flat.insert(flat.end(), net.w[l].begin(), net.w[l].end());
    flat.insert(flat.end(), net.b[l].begin(), net.b[l].end());
  }
  return flat;
}

void unflatten_params(Mlp& net, std::span<const double> flat) {
  if (flat.size() != net.param_count()) throw DomainError("unflatten_params: size mismatch");
  size_t k = 0;
  for (int l = 0; l < net.num_layers(); ++l) {
    for (auto& x : net.w[l]) x = flat[k++];
    for (auto& x : net.b[l]) x = flat[k++];
  }
}

std::vector<double> flatten_gradients(const Mlp& net, const Gradients& grads) {
  std::vector<double> flat;
  flat.reserve(net.param_count());
  for (int l = 0; l < net.num_layers(); ++l) {
    flat.insert(flat.end(), grads.w[l].begin(), grads.w[l].end());
    flat.insert(flat.end(), grads.b[l].begin(), grads.b[l].end());
  }
  return flat;
}

AdamState AdamState::for_size(size_t n, double lr) {
  AdamState s;
  s.lr = lr;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw DomainError("adam_step: shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  std::vector<double> params = flatten_params(net);
  const std::vector<double> flat = flatten_gradients(net, grads);
  adam_step(params, flat, state);
  unflatten_params(net, params);
}

double grad_check(const Mlp& net, std::span<const double> input,
                  const std::function<double(std::span<const double>)>& loss, double h) {
  // Upstream gradient of the scalar loss w.r.t. the network output, by
  // central differences on the output vector.
  ForwardCache cache;
  const std::vector<double> out = forward(net, input, &cache);
  std::vector<double> upstream(out.size());
  for (size_t o = 0; o < out.size(); ++o) {
    std::vector<double> p = out;
    std::vector<double> m = out;
    p[o] += h;
    m[o] -= h;
    upstream[o] = (loss(p) - loss(m)) / (2.0 * h);
  }
  const Gradients analytic = backward(net, cache, upstream);
  const std::vector<double> analytic_flat = flatten_gradients(net, analytic);

  Mlp probe = net;
  std::vector<double> params = flatten_params(net);
  double worst = 0.0;
  for (size_t k = 0; k < params.size(); ++k) {
    const double orig = params[k];
    params[k] = orig + h;
    unflatten_params(probe, params);
    const double lp = loss(forward(probe, input));
    params[k] = orig - h;
    unflatten_params(probe, params);
    const double lm = loss(forward(probe, input));
    params[k] = orig;
    const double numeric = (lp - lm) / (2.0 * h);
    const double denom = std::max({std::fabs(numeric), std::fabs(analytic_flat[k]), 1e-8});
    worst = std::max(worst, std::fabs(numeric - analytic_flat[k]) / denom);
  }
  unflatten_params(probe, params);
  return worst;
}

nlohmann::json mlp_to_json(const Mlp& net) {
  return nlohmann::json{{"widths", net.widths}, {"w", net.w}, {"b", net.b}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net;
  net.widths = j.at("widths").get<std::vector<int>>();
  net.w = j.at("w").get<std::vector<std::vector<double>>>();
  net.b = j.at("b").get<std::vector<std::vector<double>>>();
  for (int l = 0; l < net.num_layers(); ++l) {
    if (net.w[l].size() != static_cast<size_t>(net.widths[l]) * net.widths[l + 1] ||
        net.b[l].size() != static_cast<size_t>(net.widths[l + 1]))
      throw SchemaError("mlp_from_json: inconsistent layer shapes");
  }
  return net;
}

void save_mlp(const Mlp& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << mlp_to_json(net).dump() << '\n';
}

Mlp load_mlp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return mlp_from_json(j);
}

}  // namespace cfpp
