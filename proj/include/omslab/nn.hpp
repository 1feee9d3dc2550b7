#pragma once

// Minimal trainable conditional network: dense layers with hand-written
// forward/backward passes, a sinusoidal time embedding, a learned class
// embedding table (row 0 = null condition) and a decoupled-weight-decay Adam
// optimizer. All math in double precision; training is bit-deterministic
// given the seeds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "omslab/rng.hpp"
#include "omslab/vecmath.hpp"

namespace omslab {

// sin/cos pairs at dim/2 frequencies, geometric from 1 to 1e4.
inline Vec time_embedding(double t_norm, int dim) {
    require(dim >= 2 && dim % 2 == 0, "time_embedding: dim must be even and >= 2");
    const int pairs = dim / 2;
    Vec emb(static_cast<std::size_t>(dim));
    for (int k = 0; k < pairs; ++k) {
        double expo = pairs > 1 ? static_cast<double>(k) / (pairs - 1) : 0.0;
        double freq = std::pow(1e4, expo);
        emb[static_cast<std::size_t>(2 * k)] = std::sin(freq * t_norm);
        emb[static_cast<std::size_t>(2 * k + 1)] = std::cos(freq * t_norm);
    }
    return emb;
}

struct DenseNet {
    enum class Activation { silu, relu };

    std::size_t data_dim = 0;
    int time_embed_dim = 0;
    int class_embed_dim = 0;
    int class_count = 0;
    Activation activation = Activation::silu;
    std::vector<int> widths;  // input width, hidden..., output width

    std::vector<std::vector<double>> weights;  // weights[l]: widths[l+1] x widths[l], row-major
    std::vector<std::vector<double>> biases;   // biases[l]: widths[l+1]
    std::vector<double> class_embed;           // class_count x class_embed_dim, row-major

    std::size_t input_width() const {
        return data_dim + static_cast<std::size_t>(time_embed_dim) +
               static_cast<std::size_t>(class_embed_dim);
    }
    std::size_t layer_count() const { return weights.size(); }

    void check_class(int class_id) const {
        if (class_id < 0 || class_id >= class_count)
            throw std::invalid_argument("class_id " + std::to_string(class_id) +
                                        " out of range [0, " +
                                        std::to_string(class_count) + ")");
    }

    // Glorot-uniform weights, zero biases, class embeddings N(0, 0.02^2).
    static DenseNet make(std::size_t data_dim, const std::vector<int>& hidden,
                         int time_embed_dim, int class_embed_dim, int class_count,
                         Activation act, std::uint64_t seed) {
        require(data_dim >= 1, "DenseNet: data_dim must be >= 1");
        require(time_embed_dim >= 2 && time_embed_dim % 2 == 0,
                "DenseNet: time_embed_dim must be even and >= 2");
        require(class_embed_dim >= 1, "DenseNet: class_embed_dim must be >= 1");
        require(class_count >= 1, "DenseNet: class_count must be >= 1");
        DenseNet net;
        net.data_dim = data_dim;
        net.time_embed_dim = time_embed_dim;
        net.class_embed_dim = class_embed_dim;
        net.class_count = class_count;
        net.activation = act;
        net.widths.push_back(static_cast<int>(net.input_width()));
        for (int h : hidden) {
            require(h >= 1, "DenseNet: hidden widths must be >= 1");
            net.widths.push_back(h);
        }
        net.widths.push_back(static_cast<int>(data_dim));
        Rng rng = Rng::stream(seed, {stream_tag::kInit});
        for (std::size_t l = 0; l + 1 < net.widths.size(); ++l) {
            std::size_t fan_in = static_cast<std::size_t>(net.widths[l]);
            std::size_t fan_out = static_cast<std::size_t>(net.widths[l + 1]);
            double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            std::vector<double> w(fan_in * fan_out);
            for (auto& v : w) v = (2.0 * rng.uniform01() - 1.0) * a;
            net.weights.push_back(std::move(w));
            net.biases.emplace_back(fan_out, 0.0);
        }
        net.class_embed.resize(static_cast<std::size_t>(class_count) *
                               static_cast<std::size_t>(class_embed_dim));
        for (auto& v : net.class_embed) v = 0.02 * rng.normal();
        return net;
    }
};

inline const char* activation_name(DenseNet::Activation a) {
    return a == DenseNet::Activation::silu ? "silu" : "relu";
}

namespace detail {

inline double activate(double x, DenseNet::Activation a) {
    if (a == DenseNet::Activation::relu) return x > 0.0 ? x : 0.0;
    return x / (1.0 + std::exp(-x));
}

inline double activate_grad(double x, DenseNet::Activation a) {
    if (a == DenseNet::Activation::relu) return x > 0.0 ? 1.0 : 0.0;
    double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

}  // namespace detail

struct ForwardTrace {
    Vec input;              // x ++ time embedding ++ class embedding row
    std::vector<Vec> pre;   // pre-activation per layer
    std::vector<Vec> post;  // activated per hidden layer; last entry is the output
};

inline const Vec& net_forward_trace(const DenseNet& net, const Vec& x, double t_norm,
                                    int class_id, ForwardTrace& trace) {
    net.check_class(class_id);
    require(x.size() == net.data_dim, "net_forward: input dimension mismatch");
    trace.input.resize(net.input_width());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < net.data_dim; ++i) trace.input[pos++] = x[i];
    Vec temb = time_embedding(t_norm, net.time_embed_dim);
    for (double v : temb) trace.input[pos++] = v;
    const std::size_t crow = static_cast<std::size_t>(class_id) *
                             static_cast<std::size_t>(net.class_embed_dim);
    for (int j = 0; j < net.class_embed_dim; ++j)
        trace.input[pos++] = net.class_embed[crow + static_cast<std::size_t>(j)];

    const std::size_t L = net.layer_count();
    trace.pre.resize(L);
    trace.post.resize(L);
    const Vec* in = &trace.input;
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t nin = static_cast<std::size_t>(net.widths[l]);
        const std::size_t nout = static_cast<std::size_t>(net.widths[l + 1]);
        Vec& z = trace.pre[l];
        z.assign(nout, 0.0);
        const double* W = net.weights[l].data();
        for (std::size_t r = 0; r < nout; ++r) {
            const double* row = W + r * nin;
            double acc = net.biases[l][r];
            for (std::size_t cidx = 0; cidx < nin; ++cidx) acc += row[cidx] * (*in)[cidx];
            z[r] = acc;
        }
        Vec& a = trace.post[l];
        if (l + 1 == L) {
            a = z;  // linear output layer
        } else {
            a.resize(nout);
            for (std::size_t r = 0; r < nout; ++r)
                a[r] = detail::activate(z[r], net.activation);
        }
        in = &a;
    }
    return trace.post.back();
}

inline Vec net_forward(const DenseNet& net, const Vec& x, double t_norm, int class_id) {
    ForwardTrace trace;
    return net_forward_trace(net, x, t_norm, class_id, trace);
}

// Gradient (or Adam moment) storage with the same shapes as the parameters.
struct ParamTensors {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> class_embed;

    static ParamTensors zeros_like(const DenseNet& net) {
        ParamTensors p;
        for (const auto& w : net.weights) p.weights.emplace_back(w.size(), 0.0);
        for (const auto& b : net.biases) p.biases.emplace_back(b.size(), 0.0);
        p.class_embed.assign(net.class_embed.size(), 0.0);
        return p;
    }

    void fill_zero() {
        for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
        std::fill(class_embed.begin(), class_embed.end(), 0.0);
    }

    bool shapes_match(const DenseNet& net) const {
        if (weights.size() != net.weights.size() || biases.size() != net.biases.size() ||
            class_embed.size() != net.class_embed.size())
            return false;
        for (std::size_t l = 0; l < weights.size(); ++l)
            if (weights[l].size() != net.weights[l].size() ||
                biases[l].size() != net.biases[l].size())
                return false;
        return true;
    }
};

// Accumulates exact reverse-mode gradients of <output, upstream_grad> into
// grads. The trace must come from net_forward_trace on the same net.
inline void net_backward_accumulate(const DenseNet& net, const ForwardTrace& trace,
                                    int class_id, const Vec& upstream_grad,
                                    ParamTensors& grads) {
    net.check_class(class_id);
    require(upstream_grad.size() == net.data_dim,
            "net_backward: upstream gradient dimension mismatch");
    const std::size_t L = net.layer_count();
    Vec delta = upstream_grad;
    for (std::size_t li = L; li-- > 0;) {
        const std::size_t nin = static_cast<std::size_t>(net.widths[li]);
        const std::size_t nout = static_cast<std::size_t>(net.widths[li + 1]);
        const Vec& a_prev = li == 0 ? trace.input : trace.post[li - 1];
        double* gW = grads.weights[li].data();
        for (std::size_t r = 0; r < nout; ++r) {
            double d = delta[r];
            grads.biases[li][r] += d;
            double* row = gW + r * nin;
            for (std::size_t cidx = 0; cidx < nin; ++cidx) row[cidx] += d * a_prev[cidx];
        }
        if (li == 0) {
            // propagate into the class-embedding slice of the input
            const double* W = net.weights[0].data();
            const std::size_t offset = net.data_dim + static_cast<std::size_t>(net.time_embed_dim);
            const std::size_t crow = static_cast<std::size_t>(class_id) *
                                     static_cast<std::size_t>(net.class_embed_dim);
            for (std::size_t j = 0; j < static_cast<std::size_t>(net.class_embed_dim); ++j) {
                double acc = 0.0;
                for (std::size_t r = 0; r < nout; ++r)
                    acc += W[r * nin + offset + j] * delta[r];
                grads.class_embed[crow + j] += acc;
            }
        } else {
            const double* W = net.weights[li].data();
            Vec next(nin, 0.0);
            for (std::size_t r = 0; r < nout; ++r) {
                double d = delta[r];
                const double* row = W + r * nin;
                for (std::size_t cidx = 0; cidx < nin; ++cidx) next[cidx] += row[cidx] * d;
            }
            const Vec& z_prev = trace.pre[li - 1];
            for (std::size_t cidx = 0; cidx < nin; ++cidx)
                next[cidx] *= detail::activate_grad(z_prev[cidx], net.activation);
            delta = std::move(next);
        }
    }
}

inline ParamTensors net_backward(const DenseNet& net, const Vec& x, double t_norm,
                                 int class_id, const Vec& upstream_grad) {
    ForwardTrace trace;
    net_forward_trace(net, x, t_norm, class_id, trace);
    ParamTensors grads = ParamTensors::zeros_like(net);
    net_backward_accumulate(net, trace, class_id, upstream_grad, grads);
    return grads;
}

struct AdamState {
    ParamTensors first_moment;
    ParamTensors second_moment;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
    double learning_rate = 1e-3;

    static AdamState make(const DenseNet& net, double lr, double weight_decay = 0.01) {
        AdamState st;
        st.first_moment = ParamTensors::zeros_like(net);
        st.second_moment = ParamTensors::zeros_like(net);
        st.learning_rate = lr;
        st.weight_decay = weight_decay;
        return st;
    }
};

namespace detail {

inline void adamw_apply(double* p, const double* g, double* m, double* v, std::size_t n,
                        const AdamState& st, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
        v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] -= st.learning_rate * (mhat / (std::sqrt(vhat) + st.epsilon) +
                                    st.weight_decay * p[i]);
    }
}

}  // namespace detail

// Decoupled-weight-decay Adam with bias correction; increments step_count.
inline void adamw_update(DenseNet& net, const ParamTensors& grads, AdamState& state) {
    require(grads.shapes_match(net) && state.first_moment.shapes_match(net) &&
                state.second_moment.shapes_match(net),
            "adamw_update: shape mismatch");
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        detail::adamw_apply(net.weights[l].data(), grads.weights[l].data(),
                            state.first_moment.weights[l].data(),
                            state.second_moment.weights[l].data(), net.weights[l].size(),
                            state, bc1, bc2);
        detail::adamw_apply(net.biases[l].data(), grads.biases[l].data(),
                            state.first_moment.biases[l].data(),
                            state.second_moment.biases[l].data(), net.biases[l].size(),
                            state, bc1, bc2);
    }
    detail::adamw_apply(net.class_embed.data(), grads.class_embed.data(),
                        state.first_moment.class_embed.data(),
                        state.second_moment.class_embed.data(), net.class_embed.size(),
                        state, bc1, bc2);
}

}  // namespace omslab
