#pragma once

// The two training loops: the base conditional denoiser (epsilon- or
// v-prediction on noised data) and the terminal-correction module, which maps
// pure Gaussian noise plus a condition to a v-prediction at zero SNR. Both use
// plain minibatch AdamW on a mean squared error.

#include <cstdint>
#include <tuple>
#include <vector>

#include "omslab/data.hpp"
#include "omslab/nn.hpp"
#include "omslab/parameterize.hpp"
#include "omslab/schedule.hpp"

namespace omslab {

struct TrainConfig {
    enum class PredType { epsilon, v };
    enum class OmsTarget { v, x0 };

    PredType pred_type = PredType::epsilon;
    Schedule schedule;
    int batch_size = 64;
    double learning_rate = 1e-3;
    int iterations = 1;
    double cond_dropout_p = 0.1;
    double offset_noise = 0.0;  // 0 disables; the usual enabled strength is 0.1
    std::size_t offset_groups = 1;
    std::uint64_t seed = 0;
    OmsTarget oms_target = OmsTarget::v;  // only used by train_oms

    void validate_common() const {
        require(iterations >= 1, "train config: iterations must be >= 1");
        require(batch_size >= 1, "train config: batch_size must be >= 1");
        require(learning_rate > 0.0, "train config: learning_rate must be > 0");
        require(cond_dropout_p >= 0.0 && cond_dropout_p < 1.0,
                "train config: cond_dropout_p must be in [0,1)");
        require(offset_noise >= 0.0, "train config: offset_noise must be >= 0");
    }

    void validate_for_denoiser() const {
        validate_common();
        if (pred_type == PredType::epsilon && schedule.terminal_abar() == 0.0)
            throw std::invalid_argument(
                "train config: epsilon-prediction against a zero-terminal-SNR "
                "schedule is numerically singular at t = T; use v-prediction");
    }
};

inline const char* pred_type_name(TrainConfig::PredType p) {
    return p == TrainConfig::PredType::epsilon ? "epsilon" : "v";
}

struct DenoiserModel {
    DenseNet net;
    TrainConfig::PredType pred_type = TrainConfig::PredType::epsilon;
    Schedule schedule;

    std::size_t dim() const { return net.data_dim; }

    Prediction predict(const Vec& xt, int t, int class_id) const {
        schedule.check_timestep(t);
        Prediction p;
        p.kind = pred_type == TrainConfig::PredType::epsilon ? Prediction::Kind::epsilon
                                                             : Prediction::Kind::v;
        p.values = net_forward(net, xt, static_cast<double>(t) / schedule.num_steps,
                               class_id);
        return p;
    }
};

struct OmsModule {
    DenseNet net;
    TrainConfig::OmsTarget target = TrainConfig::OmsTarget::v;
    Schedule schedule;

    std::size_t dim() const { return net.data_dim; }

    // Output in the v convention regardless of the training target: the
    // x0-target variant learns x0 directly and v = -x0 at zero SNR.
    Vec predict_v(const Vec& x_terminal, int class_id) const {
        Vec out = net_forward(net, x_terminal, 1.0, class_id);
        if (target == TrainConfig::OmsTarget::x0)
            for (auto& v : out) v = -v;
        return out;
    }
};

namespace detail {

struct MiniBatchTrainer {
    const Batch& data;
    DenseNet& net;
    const TrainConfig& config;
    Rng rng;
    AdamState opt;
    ParamTensors grads;
    ForwardTrace trace;

    MiniBatchTrainer(const Batch& data_, DenseNet& net_, const TrainConfig& config_)
        : data(data_),
          net(net_),
          config(config_),
          rng(Rng::stream(config_.seed, {stream_tag::kTrain})),
          opt(AdamState::make(net_, config_.learning_rate)),
          grads(ParamTensors::zeros_like(net_)) {
        require(net.data_dim == data.dim, "train: net output dim != data dim");
        require(!data.items.empty(), "train: empty dataset");
    }

    // One optimizer step; sample_fn(item, class_id) -> (input, t_norm, target).
    template <typename SampleFn>
    double step(SampleFn&& sample_fn) {
        grads.fill_zero();
        const double d = static_cast<double>(net.data_dim);
        const double bsz = static_cast<double>(config.batch_size);
        double loss = 0.0;
        Vec upstream(net.data_dim);
        for (int b = 0; b < config.batch_size; ++b) {
            const auto& item = data.items[rng.uniform_index(data.items.size())];
            int cid = item.class_id;
            if (config.cond_dropout_p > 0.0 && rng.uniform01() < config.cond_dropout_p)
                cid = 0;
            auto [input, t_norm, target] = sample_fn(item, cid);
            const Vec& out = net_forward_trace(net, input, t_norm, cid, trace);
            double sq = 0.0;
            for (std::size_t j = 0; j < net.data_dim; ++j) {
                double r = out[j] - target[j];
                sq += r * r;
                upstream[j] = 2.0 * r / (d * bsz);
            }
            loss += sq / d;
            net_backward_accumulate(net, trace, cid, upstream, grads);
        }
        adamw_update(net, grads, opt);
        return loss / bsz;
    }
};

}  // namespace detail

// Denoising-score-matching loop: x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps
// with t uniform in 1..T, target eps or v depending on config.pred_type.
inline DenoiserModel train_denoiser(const Batch& data, DenseNet net,
                                    const TrainConfig& config,
                                    std::vector<double>* loss_log = nullptr) {
    config.validate_for_denoiser();
    detail::MiniBatchTrainer trainer(data, net, config);
    const Schedule& sched = config.schedule;
    const int T = sched.num_steps;
    Vec noise(data.dim);
    for (int it = 0; it < config.iterations; ++it) {
        double loss = trainer.step([&](const Batch::Item& item, int) {
            int t = 1 + static_cast<int>(trainer.rng.uniform_index(
                        static_cast<std::uint64_t>(T)));
            if (config.offset_noise > 0.0) {
                noise = offset_noise_sample(data.dim, config.offset_groups,
                                            config.offset_noise, trainer.rng);
            } else {
                for (auto& v : noise) v = trainer.rng.normal();
            }
            double a = sched.abar(t);
            Vec xt = lin_comb(std::sqrt(a), item.values, std::sqrt(1.0 - a), noise);
            Vec target = config.pred_type == TrainConfig::PredType::epsilon
                             ? noise
                             : v_from_x0_eps(item.values, noise, a);
            return std::make_tuple(std::move(xt), static_cast<double>(t) / T,
                                   std::move(target));
        });
        if (loss_log) loss_log->push_back(loss);
    }
    DenoiserModel model;
    model.net = std::move(net);
    model.pred_type = config.pred_type;
    model.schedule = config.schedule;
    return model;
}

// Terminal-correction loop: the input is fresh standard normal, independent of
// the drawn x0, so the optimum is the conditional mean of the data. Target is
// v = -x0 (v mode) or x0 itself (x0 mode); the two converge to the same
// function up to sign.
inline OmsModule train_oms(const Batch& data, DenseNet net, const TrainConfig& config,
                           std::vector<double>* loss_log = nullptr) {
    config.validate_common();
    detail::MiniBatchTrainer trainer(data, net, config);
    for (int it = 0; it < config.iterations; ++it) {
        double loss = trainer.step([&](const Batch::Item& item, int) {
            Vec input(data.dim);
            for (auto& v : input) v = trainer.rng.normal();
            Vec target = config.oms_target == TrainConfig::OmsTarget::v
                             ? scaled(-1.0, item.values)
                             : item.values;
            return std::make_tuple(std::move(input), 1.0, std::move(target));
        });
        if (loss_log) loss_log->push_back(loss);
    }
    OmsModule module;
    module.net = std::move(net);
    module.target = config.oms_target;
    module.schedule = config.schedule;
    return module;
}

}  // namespace omslab
