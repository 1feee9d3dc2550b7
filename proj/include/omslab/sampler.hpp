#pragma once

// Reverse-process samplers: the ancestral DDPM step, the generalized DDIM step
// (eta-parameterized), the v-prediction terminal step, the terminal-correction
// step that maps pure noise to the latent the pre-trained model expects, and
// the full sampling pipeline with classifier-free guidance on both stages.
//
// Chain randomness derives from (seed, chain index), so sampling n chains is
// embarrassingly parallel and the result does not depend on the worker count.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "omslab/data.hpp"
#include "omslab/parallel.hpp"
#include "omslab/parameterize.hpp"
#include "omslab/rng.hpp"
#include "omslab/schedule.hpp"
#include "omslab/training.hpp"

namespace omslab {

struct SamplerConfig {
    std::vector<int> step_grid;  // strictly decreasing, within 1..T, ends at 1
    double eta = 0.0;
    double omega_theta = 1.0;  // base-model CFG weight; 1 disables guidance
    double omega_psi = 1.0;    // correction-stage CFG weight
    double oms_sigma = 0.0;
    int base_condition = 0;
    std::optional<int> oms_condition;  // nullopt = same as base_condition
    int negative_condition = 0;
    std::uint64_t seed = 0;

    void validate(const Schedule& sched) const {
        require(!step_grid.empty(), "sampler config: empty step grid");
        require(step_grid.back() == 1, "sampler config: step grid must end at 1");
        int prev = sched.num_steps + 1;
        for (int t : step_grid) {
            require(t >= 1 && t <= sched.num_steps,
                    "sampler config: step grid entry out of range");
            require(t < prev, "sampler config: step grid must be strictly decreasing");
            prev = t;
        }
        require(eta >= 0.0 && eta <= 1.0, "sampler config: eta must be in [0,1]");
        require(omega_theta >= 0.0 && omega_psi >= 0.0,
                "sampler config: guidance weights must be >= 0");
        require(oms_sigma >= 0.0, "sampler config: oms_sigma must be >= 0");
    }
};

// Uniform stride over 1..T, both endpoints included.
inline std::vector<int> uniform_step_grid(int T, int steps) {
    require(T >= 2, "uniform_step_grid: T must be >= 2");
    require(steps >= 2 && steps <= T, "uniform_step_grid: need 2 <= steps <= T");
    std::vector<int> grid;
    grid.reserve(static_cast<std::size_t>(steps));
    int prev = T + 1;
    for (int i = 0; i < steps; ++i) {
        double v = static_cast<double>(T) -
                   static_cast<double>(i) * (T - 1) / static_cast<double>(steps - 1);
        int t = static_cast<int>(std::lround(v));
        if (t >= prev) t = prev - 1;  // guard against rounding collisions
        grid.push_back(t);
        prev = t;
    }
    grid.back() = 1;
    return grid;
}

// uncond + omega * (cond - uncond); affine in omega.
inline Vec cfg_combine(const Vec& uncond, const Vec& cond, double omega) {
    require_same_dim(uncond, cond, "cfg_combine");
    return lin_comb(1.0 - omega, uncond, omega, cond);
}

// Ancestral step with epsilon prediction:
// x_{t-1} = (x_t - (1-alpha_t)/sqrt(1-abar_t) eps) / sqrt(alpha_t) + sigma_t z,
// sigma_t^2 = (1-abar_{t-1})/(1-abar_t) beta_t; the noise term is dropped at t=1.
inline Vec ddpm_step(const Vec& xt, const Vec& eps_hat, int t, const Schedule& sched,
                     const Vec& noise) {
    sched.check_timestep(t);
    require_same_dim(xt, eps_hat, "ddpm_step");
    const double abar_t = sched.abar(t);
    if (abar_t == 0.0)
        throw SingularParamError(
            "ddpm_step: epsilon update is singular at zero SNR (abar_t == 0)");
    const double alpha_t = sched.alpha(t);
    const double coeff = (1.0 - alpha_t) / std::sqrt(1.0 - abar_t);
    Vec out = lin_comb(1.0 / std::sqrt(alpha_t), xt, -coeff / std::sqrt(alpha_t), eps_hat);
    if (t > 1) {
        require_same_dim(xt, noise, "ddpm_step noise");
        const double var = (1.0 - sched.abar(t - 1)) / (1.0 - abar_t) * sched.beta(t);
        const double sigma = std::sqrt(var);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * noise[i];
    }
    return out;
}

// DDIM noise scale for a jump t -> t_prev.
inline double ddim_sigma(const Schedule& sched, int t, int t_prev, double eta) {
    if (eta == 0.0) return 0.0;
    const double a = sched.abar(t);
    const double ap = sched.abar(t_prev);
    return eta * std::sqrt((1.0 - ap) / (1.0 - a)) * std::sqrt(1.0 - a / ap);
}

// x_{t_prev} = sqrt(abar_{t_prev}) x0_hat + sqrt(1 - abar_{t_prev} - sigma^2) eps_hat
//            + sigma z, with x0_hat decoded from the prediction and eps_hat the
// noise consistent with (x_t, x0_hat). t_prev == 0 yields the final x0 output.
inline Vec ddim_step(const Vec& xt, const Prediction& pred, int t, int t_prev,
                     const Schedule& sched, double eta, const Vec& noise) {
    sched.check_timestep(t);
    require(t_prev >= 0 && t_prev < t, "ddim_step: need 0 <= t_prev < t");
    require_same_dim(xt, pred.values, "ddim_step");
    const double a = sched.abar(t);
    const double ap = sched.abar(t_prev);
    const Vec x0 = x0_from_prediction(xt, pred, a);
    const double sigma = ddim_sigma(sched, t, t_prev, eta);
    require(sigma * sigma <= 1.0 - ap + 1e-15,
            "ddim_step: sigma^2 exceeds 1 - abar_{t_prev}");
    // eps consistent with (x_t, x0_hat); at abar_t == 0 this is x_t itself.
    const double sq1a = std::sqrt(1.0 - a);
    Vec eps = lin_comb(1.0 / sq1a, xt, -std::sqrt(a) / sq1a, x0);
    double dir = 1.0 - ap - sigma * sigma;
    if (dir < 0.0) dir = 0.0;
    Vec out = lin_comb(std::sqrt(ap), x0, std::sqrt(dir), eps);
    if (sigma > 0.0) {
        require_same_dim(xt, noise, "ddim_step noise");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * noise[i];
    }
    return out;
}

// Terminal step at zero SNR: x_{T-1} = -sqrt(abar_{T-1}) v_hat + sigma_T z,
// i.e. sqrt(abar_{T-1}) x0_hat + sigma_T z with x0_hat = -v_hat.
inline Vec v_terminal_step(const Vec& xT, const Vec& v_hat, const Schedule& sched,
                           double sigma_T, const Vec& noise) {
    require_same_dim(xT, v_hat, "v_terminal_step");
    const double c = std::sqrt(sched.abar(sched.num_steps - 1));
    Vec out = scaled(-c, v_hat);
    if (sigma_T > 0.0) {
        require_same_dim(xT, noise, "v_terminal_step noise");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma_T * noise[i];
    }
    return out;
}

// The correction step handed to the base model at timestep T:
// x_T = sqrt(abar_T) x0_hat + sqrt(1 - abar_T - sigma^2) x_T^sample + sigma z,
// x0_hat = -v_hat. On a zero-terminal schedule with sigma == 0 this is the
// identity: there is nothing to correct.
inline Vec oms_step(const Vec& x_sample, const Vec& v_hat, const Schedule& sched,
                    double sigma, const Vec& noise) {
    require_same_dim(x_sample, v_hat, "oms_step");
    const double aT = sched.terminal_abar();
    require(sigma * sigma <= 1.0 - aT, "oms_step: sigma^2 exceeds 1 - abar_T");
    if (aT == 0.0 && sigma == 0.0) return x_sample;
    Vec out = lin_comb(-std::sqrt(aT), v_hat, std::sqrt(1.0 - aT - sigma * sigma),
                       x_sample);
    if (sigma > 0.0) {
        require_same_dim(x_sample, noise, "oms_step noise");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * noise[i];
    }
    return out;
}

namespace detail {

template <typename DenoiserT>
Prediction guided_prediction(const DenoiserT& model, const Vec& x, int t,
                             const SamplerConfig& cfg) {
    if (cfg.omega_theta == 1.0) return model.predict(x, t, cfg.base_condition);
    Prediction uncond = model.predict(x, t, cfg.negative_condition);
    Prediction cond = model.predict(x, t, cfg.base_condition);
    cond.values = cfg_combine(uncond.values, cond.values, cfg.omega_theta);
    return cond;
}

template <typename OmsT>
Vec guided_oms_v(const OmsT& oms, const Vec& x, const SamplerConfig& cfg) {
    const int cond_id = cfg.oms_condition.value_or(cfg.base_condition);
    if (cfg.omega_psi == 1.0) return oms.predict_v(x, cond_id);
    Vec uncond = oms.predict_v(x, cfg.negative_condition);
    Vec cond = oms.predict_v(x, cond_id);
    return cfg_combine(uncond, cond, cfg.omega_psi);
}

}  // namespace detail

// Full pipeline: draw x_T ~ N(0, I); if a correction module is present, apply
// its guided step first; then run guided DDIM over the step grid down to the
// final x0 output. Without the module the chain starts from raw noise (the
// flawed baseline this laboratory studies).
//
// DenoiserT needs .schedule, .dim() and .predict(x, t, class_id) -> Prediction;
// OmsT needs .dim() and .predict_v(x, class_id) -> Vec. Trained models satisfy
// this, and so do closed-form oracles in the tests.
template <typename DenoiserT, typename OmsT = OmsModule>
Batch sample_pipeline(const DenoiserT& denoiser, const OmsT* oms, std::size_t n,
                      const SamplerConfig& config, int workers = 1) {
    config.validate(denoiser.schedule);
    const Schedule& sched = denoiser.schedule;
    require(config.step_grid.front() <= sched.num_steps,
            "sample_pipeline: grid exceeds schedule");
    if (oms) {
        require(oms->dim() == denoiser.dim(),
                "sample_pipeline: correction module dimension mismatch");
    }
    const std::size_t d = denoiser.dim();
    Batch out;
    out.dim = d;
    out.items.resize(n);
    parallel_blocks(n, workers, [&](std::size_t begin, std::size_t end) {
        Vec noise(d, 0.0);
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = Rng::stream(config.seed, {stream_tag::kChain, i});
            Vec x(d);
            for (auto& v : x) v = rng.normal();
            if (oms) {
                Vec v_hat = detail::guided_oms_v(*oms, x, config);
                if (config.oms_sigma > 0.0)
                    for (auto& v : noise) v = rng.normal();
                x = oms_step(x, v_hat, sched, config.oms_sigma, noise);
            }
            for (std::size_t k = 0; k < config.step_grid.size(); ++k) {
                const int t = config.step_grid[k];
                const int t_prev =
                    k + 1 < config.step_grid.size() ? config.step_grid[k + 1] : 0;
                Prediction pred = detail::guided_prediction(denoiser, x, t, config);
                const double sigma = ddim_sigma(sched, t, t_prev, config.eta);
                if (sigma > 0.0)
                    for (auto& v : noise) v = rng.normal();
                x = ddim_step(x, pred, t, t_prev, sched, config.eta, noise);
            }
            out.items[i].values = std::move(x);
            out.items[i].class_id = config.base_condition;
        }
    });
    return out;
}

template <typename DenoiserT>
Batch sample_pipeline(const DenoiserT& denoiser, std::size_t n,
                      const SamplerConfig& config, int workers = 1) {
    return sample_pipeline<DenoiserT, OmsModule>(denoiser, nullptr, n, config, workers);
}

}  // namespace omslab
