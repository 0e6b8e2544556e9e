#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hasflow/mat.hpp"
#include "hasflow/rng.hpp"

namespace hasflow::neural {

enum class Activation : uint32_t { Tanh = 0, Identity = 1 };

struct Layer {
    Mat w;           // out x in, row-major
    Vec b;           // out
    Activation act = Activation::Identity;
};

// Small dense velocity network. Math runs in double; the checkpoint format
// stores parameters as float32.
struct DenseNet {
    std::vector<Layer> layers;
    int input_dim = 0;
    int output_dim = 0;

    size_t param_count() const;
};

// Gradients (or any tensor set) shaped like a DenseNet's parameters.
struct ParamGrads {
    std::vector<Mat> w;
    std::vector<Vec> b;

    void zero();
    void scale(double f);
    double squared_norm() const;

    static ParamGrads zeros_like(const DenseNet& net);
};

// Activations recorded by forward_cached, consumed by backward.
struct ForwardCache {
    std::vector<Vec> inputs;   // input to each layer (inputs[0] = x)
    Vec output;                // post-activation of the last layer
};

// Hidden layers tanh, final layer identity; Xavier-uniform weights, zero biases.
DenseNet make_mlp(const std::vector<int>& dims, Rng& rng);

Vec forward(const DenseNet& net, const Vec& x);
void forward_cached(const DenseNet& net, const Vec& x, ForwardCache& cache);

// Exact reverse-mode gradients of the forward map. Accumulates parameter
// gradients into `grads` (callers zero it between batches) and writes the
// input gradient to `dx` when non-null.
void backward(const DenseNet& net, const ForwardCache& cache, const Vec& upstream,
              ParamGrads& grads, Vec* dx = nullptr);

struct AdamState {
    ParamGrads m;  // first-moment accumulators
    ParamGrads v;  // second-moment accumulators
    long step = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double weight_decay = 0.0;

    static AdamState init(const DenseNet& net, double lr, double beta1, double beta2, double eps,
                          double weight_decay);
};

// Bias-corrected Adam update with decoupled weight decay.
void adam_step(AdamState& state, DenseNet& net, const ParamGrads& grads);

// Scales grads so the global L2 norm does not exceed max_norm. Returns the
// pre-clip norm.
double clip_grad_norm(ParamGrads& grads, double max_norm);

// Checkpoint format "FCNET1": magic, layer dimensions as u32 LE, parameters
// as f32 LE in layer order (weights row-major, then biases).
void save_net(std::ostream& os, const DenseNet& net);
DenseNet load_net(std::istream& is);

}  // namespace hasflow::neural
