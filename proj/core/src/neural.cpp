#include "hasflow/neural.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hasflow::neural {

size_t DenseNet::param_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

void ParamGrads::zero() {
    for (auto& m : w) m.fill(0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

void ParamGrads::scale(double f) {
    for (auto& m : w)
        for (auto& x : m.data) x *= f;
    for (auto& v : b)
        for (auto& x : v) x *= f;
}

double ParamGrads::squared_norm() const {
    double s = 0.0;
    for (const auto& m : w)
        for (double x : m.data) s += x * x;
    for (const auto& v : b)
        for (double x : v) s += x * x;
    return s;
}

ParamGrads ParamGrads::zeros_like(const DenseNet& net) {
    ParamGrads g;
    for (const auto& l : net.layers) {
        g.w.emplace_back(l.w.rows, l.w.cols);
        g.b.emplace_back(l.b.size(), 0.0);
    }
    return g;
}

DenseNet make_mlp(const std::vector<int>& dims, Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("make_mlp needs at least input and output dims");
    DenseNet net;
    net.input_dim = dims.front();
    net.output_dim = dims.back();
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.w = Mat(dims[i + 1], dims[i]);
        l.b.assign(dims[i + 1], 0.0);
        l.act = (i + 2 < dims.size()) ? Activation::Tanh : Activation::Identity;
        double bound = std::sqrt(6.0 / (dims[i] + dims[i + 1]));
        for (auto& x : l.w.data) x = rng.uniform(-bound, bound);
        net.layers.push_back(std::move(l));
    }
    return net;
}

static void affine(const Layer& l, const Vec& x, Vec& out) {
    const int rows = l.w.rows, cols = l.w.cols;
    out.resize(rows);
    for (int r = 0; r < rows; ++r) {
        const double* wr = l.w.row(r);
        double acc = l.b[r];
        for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
    if (l.act == Activation::Tanh)
        for (auto& v : out) v = std::tanh(v);
}

Vec forward(const DenseNet& net, const Vec& x) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    Vec cur = x, next;
    for (const auto& l : net.layers) {
        affine(l, cur, next);
        cur.swap(next);
    }
    return cur;
}

void forward_cached(const DenseNet& net, const Vec& x, ForwardCache& cache) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw std::invalid_argument("forward_cached: input dimension mismatch");
    cache.inputs.resize(net.layers.size());
    cache.inputs[0] = x;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        Vec* out = (i + 1 < net.layers.size()) ? &cache.inputs[i + 1] : &cache.output;
        affine(net.layers[i], cache.inputs[i], *out);
    }
}

void backward(const DenseNet& net, const ForwardCache& cache, const Vec& upstream,
              ParamGrads& grads, Vec* dx) {
    if (static_cast<int>(upstream.size()) != net.output_dim)
        throw std::invalid_argument("backward: upstream dimension mismatch");
    if (grads.w.size() != net.layers.size())
        throw std::invalid_argument("backward: gradient shapes do not match net");

    Vec delta = upstream;  // gradient w.r.t. the current layer's post-activation
    Vec prev;
    for (int li = static_cast<int>(net.layers.size()) - 1; li >= 0; --li) {
        const Layer& l = net.layers[li];
        const Vec& in = cache.inputs[li];
        const Vec& post = (li + 1 < static_cast<int>(net.layers.size())) ? cache.inputs[li + 1]
                                                                         : cache.output;
        // tanh' = 1 - tanh^2, evaluated on the stored post-activation
        if (l.act == Activation::Tanh)
            for (size_t r = 0; r < delta.size(); ++r) delta[r] *= 1.0 - post[r] * post[r];

        Mat& gw = grads.w[li];
        Vec& gb = grads.b[li];
        for (int r = 0; r < l.w.rows; ++r) {
            const double d = delta[r];
            gb[r] += d;
            double* gwr = gw.row(r);
            for (int c = 0; c < l.w.cols; ++c) gwr[c] += d * in[c];
        }
        if (li > 0 || dx != nullptr) {
            prev.assign(l.w.cols, 0.0);
            for (int r = 0; r < l.w.rows; ++r) {
                const double d = delta[r];
                const double* wr = l.w.row(r);
                for (int c = 0; c < l.w.cols; ++c) prev[c] += d * wr[c];
            }
            delta.swap(prev);
        }
    }
    if (dx != nullptr) *dx = delta;
}

AdamState AdamState::init(const DenseNet& net, double lr, double beta1, double beta2, double eps,
                          double weight_decay) {
    AdamState s;
    s.m = ParamGrads::zeros_like(net);
    s.v = ParamGrads::zeros_like(net);
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    s.weight_decay = weight_decay;
    return s;
}

void adam_step(AdamState& state, DenseNet& net, const ParamGrads& grads) {
    if (grads.w.size() != net.layers.size())
        throw std::invalid_argument("adam_step: gradient shapes do not match net");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, state.step);
    const double bc2 = 1.0 - std::pow(state.beta2, state.step);

    auto update = [&](double& p, double& m, double& v, double g) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        double mhat = m / bc1;
        double vhat = v / bc2;
        p -= state.lr * (mhat / (std::sqrt(vhat) + state.eps) + state.weight_decay * p);
    };

    for (size_t li = 0; li < net.layers.size(); ++li) {
        Layer& l = net.layers[li];
        for (size_t i = 0; i < l.w.data.size(); ++i)
            update(l.w.data[i], state.m.w[li].data[i], state.v.w[li].data[i], grads.w[li].data[i]);
        for (size_t i = 0; i < l.b.size(); ++i)
            update(l.b[i], state.m.b[li][i], state.v.b[li][i], grads.b[li][i]);
    }
}

double clip_grad_norm(ParamGrads& grads, double max_norm) {
    double norm = std::sqrt(grads.squared_norm());
    if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
    return norm;
}

// ---- checkpoint io ----

static constexpr char kMagic[6] = {'F', 'C', 'N', 'E', 'T', '1'};

static void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

static uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("checkpoint truncated");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

static void put_f32(std::ostream& os, double v) {
    float f = static_cast<float>(v);
    uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(os, u);
}

static double get_f32(std::istream& is) {
    uint32_t u = get_u32(is);
    float f;
    std::memcpy(&f, &u, 4);
    return static_cast<double>(f);
}

void save_net(std::ostream& os, const DenseNet& net) {
    os.write(kMagic, sizeof(kMagic));
    put_u32(os, static_cast<uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        put_u32(os, static_cast<uint32_t>(l.w.cols));
        put_u32(os, static_cast<uint32_t>(l.w.rows));
        put_u32(os, static_cast<uint32_t>(l.act));
    }
    for (const auto& l : net.layers) {
        for (double v : l.w.data) put_f32(os, v);
        for (double v : l.b) put_f32(os, v);
    }
}

DenseNet load_net(std::istream& is) {
    char magic[6];
    is.read(magic, 6);
    if (!is || std::memcmp(magic, kMagic, 6) != 0)
        throw std::runtime_error("bad checkpoint magic (want FCNET1)");
    uint32_t n_layers = get_u32(is);
    if (n_layers == 0 || n_layers > 64) throw std::runtime_error("implausible layer count");

    DenseNet net;
    for (uint32_t i = 0; i < n_layers; ++i) {
        uint32_t in = get_u32(is), out = get_u32(is), act = get_u32(is);
        if (act > 1) throw std::runtime_error("unknown activation code");
        Layer l;
        l.w = Mat(static_cast<int>(out), static_cast<int>(in));
        l.b.assign(out, 0.0);
        l.act = static_cast<Activation>(act);
        net.layers.push_back(std::move(l));
    }
    net.input_dim = net.layers.front().w.cols;
    net.output_dim = net.layers.back().w.rows;
    for (uint32_t i = 1; i < n_layers; ++i)
        if (net.layers[i].w.cols != net.layers[i - 1].w.rows)
            throw std::runtime_error("layer dimensions do not chain");
    for (auto& l : net.layers) {
        for (auto& v : l.w.data) v = get_f32(is);
        for (auto& v : l.b) v = get_f32(is);
    }
    return net;
}

}  // namespace hasflow::neural
