#pragma once

// Discrete variance-preserving noise schedules: beta_t, alpha_t, abar_t and
// SNR(t) for t = 1..T (1-based; abar(0) == 1 is the virtual boundary used by
// reverse steps at t = 1). Schedules are immutable after construction.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "omslab/vecmath.hpp"

namespace omslab {

struct Schedule {
    enum class Kind { linear, cosine, ldm };

    Kind base_kind = Kind::linear;
    bool rescaled = false;
    int num_steps = 0;                    // T
    std::vector<double> betas;            // betas[t-1] = beta_t
    std::vector<double> alphas;           // 1 - beta_t
    std::vector<double> alpha_bars;       // cumulative product of alphas
    std::map<std::string, double> params; // builder parameters, for round trips

    double beta(int t) const { return betas[static_cast<std::size_t>(t - 1)]; }
    double alpha(int t) const { return alphas[static_cast<std::size_t>(t - 1)]; }
    double abar(int t) const {
        return t == 0 ? 1.0 : alpha_bars[static_cast<std::size_t>(t - 1)];
    }
    double terminal_abar() const { return alpha_bars.back(); }

    std::string kind_name() const {
        std::string base = base_kind == Kind::linear   ? "linear"
                           : base_kind == Kind::cosine ? "cosine"
                                                       : "ldm";
        return rescaled ? "rescaled(" + base + ")" : base;
    }

    void check_timestep(int t) const {
        if (t < 1 || t > num_steps)
            throw std::invalid_argument("timestep " + std::to_string(t) +
                                        " out of range [1, " +
                                        std::to_string(num_steps) + "]");
    }
};

namespace detail {

inline void finalize_from_betas(Schedule& s) {
    const std::size_t n = s.betas.size();
    s.alphas.resize(n);
    s.alpha_bars.resize(n);
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        s.alphas[i] = 1.0 - s.betas[i];
        prod *= s.alphas[i];
        s.alpha_bars[i] = prod;
    }
}

inline void validate_schedule(const Schedule& s) {
    require(s.num_steps >= 2, "schedule: T must be >= 2");
    require(s.betas.size() == static_cast<std::size_t>(s.num_steps),
            "schedule: betas size mismatch");
    const std::size_t n = s.betas.size();
    for (std::size_t i = 0; i < n; ++i) {
        double b = s.betas[i];
        require(std::isfinite(b) && b > 0.0 && b <= 1.0,
                "schedule: beta out of (0,1] at t=" + std::to_string(i + 1));
        if (b == 1.0)
            require(s.rescaled && i + 1 == n,
                    "schedule: beta == 1 only allowed at T on rescaled schedules");
        require(s.alphas[i] == 1.0 - s.betas[i], "schedule: alphas inconsistent");
    }
    double prod = 1.0, prev = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        prod *= s.alphas[i];
        require(s.alpha_bars[i] == prod,
                "schedule: alpha_bars not the cumulative product of alphas");
        require(s.alpha_bars[i] >= 0.0 && s.alpha_bars[i] < 1.0,
                "schedule: alpha_bar out of [0,1)");
        require(s.alpha_bars[i] < prev, "schedule: alpha_bars not strictly decreasing");
        prev = s.alpha_bars[i];
    }
    if (s.rescaled)
        require(s.alpha_bars.back() == 0.0 && s.betas.back() == 1.0,
                "schedule: rescaled schedule must have abar_T == 0, beta_T == 1");
    else
        require(s.alpha_bars.back() > 0.0,
                "schedule: non-rescaled schedule must have abar_T > 0");
}

}  // namespace detail

// beta_t = (sqrt(0.00085)*(T-t)/(T-1) + sqrt(0.012)*(t-1)/(T-1))^2, 1-based t.
inline Schedule build_ldm_schedule(int T) {
    require(T >= 2, "build_ldm_schedule: T must be >= 2");
    Schedule s;
    s.base_kind = Schedule::Kind::ldm;
    s.num_steps = T;
    s.betas.resize(static_cast<std::size_t>(T));
    const double b0 = std::sqrt(0.00085);
    const double b1 = std::sqrt(0.012);
    for (int t = 1; t <= T; ++t) {
        double w = static_cast<double>(t - 1) / static_cast<double>(T - 1);
        double root = b0 * (1.0 - w) + b1 * w;
        s.betas[static_cast<std::size_t>(t - 1)] = root * root;
    }
    detail::finalize_from_betas(s);
    detail::validate_schedule(s);
    return s;
}

inline Schedule build_linear_schedule(int T, double beta_start = 1e-4,
                                      double beta_end = 0.02) {
    require(T >= 2, "build_linear_schedule: T must be >= 2");
    require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0,
            "build_linear_schedule: need 0 < beta_start <= beta_end < 1");
    Schedule s;
    s.base_kind = Schedule::Kind::linear;
    s.num_steps = T;
    s.params = {{"beta_start", beta_start}, {"beta_end", beta_end}};
    s.betas.resize(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        double w = static_cast<double>(t - 1) / static_cast<double>(T - 1);
        s.betas[static_cast<std::size_t>(t - 1)] =
            beta_start + w * (beta_end - beta_start);
    }
    detail::finalize_from_betas(s);
    detail::validate_schedule(s);
    return s;
}

// abar_t = f(t)/f(0), f(u) = cos^2(((u/T + s)/(1 + s)) * pi/2); betas derived
// from the abar ratios, clipped to beta_clip, then abar recomputed from the
// clipped betas.
inline Schedule build_cosine_schedule(int T, double s_offset = 0.008,
                                      double beta_clip = 0.999) {
    require(T >= 2, "build_cosine_schedule: T must be >= 2");
    require(s_offset > 0.0, "build_cosine_schedule: s must be > 0");
    require(beta_clip > 0.0 && beta_clip < 1.0,
            "build_cosine_schedule: beta_clip must be in (0,1)");
    Schedule s;
    s.base_kind = Schedule::Kind::cosine;
    s.num_steps = T;
    s.params = {{"s", s_offset}, {"beta_clip", beta_clip}};
    auto f = [&](double u) {
        double c = std::cos(((u / T + s_offset) / (1.0 + s_offset)) *
                            std::numbers::pi / 2.0);
        return c * c;
    };
    const double f0 = f(0.0);
    s.betas.resize(static_cast<std::size_t>(T));
    double prev = 1.0;  // f(0)/f(0)
    for (int t = 1; t <= T; ++t) {
        double cur = f(static_cast<double>(t)) / f0;
        double b = 1.0 - cur / prev;
        if (b > beta_clip) b = beta_clip;
        s.betas[static_cast<std::size_t>(t - 1)] = b;
        prev = cur;
    }
    detail::finalize_from_betas(s);
    detail::validate_schedule(s);
    return s;
}

// SNR(t) = abar_t / (1 - abar_t); exactly 0 when abar_t == 0.
inline double snr(const Schedule& sched, int t) {
    sched.check_timestep(t);
    double a = sched.abar(t);
    if (a == 0.0) return 0.0;
    return a / (1.0 - a);
}

// Shift-then-scale on sqrt(abar) so that abar_T becomes exactly 0 while the
// first step abar_1 is preserved; betas are rebuilt from the new ratios and
// abar recomputed as their cumulative product (so beta_T == 1 exactly).
inline Schedule rescale_zero_terminal(const Schedule& sched) {
    require(sched.terminal_abar() > 0.0,
            "rescale_zero_terminal: schedule already has zero terminal SNR");
    const int T = sched.num_steps;
    std::vector<double> u(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) u[static_cast<std::size_t>(t - 1)] = std::sqrt(sched.abar(t));
    const double u1 = u.front(), uT = u.back();
    const double scale = u1 / (u1 - uT);
    Schedule s;
    s.base_kind = sched.base_kind;
    s.rescaled = true;
    s.num_steps = T;
    s.params = sched.params;
    s.betas.resize(static_cast<std::size_t>(T));
    double prev_abar = 1.0;  // abar'_0
    for (int t = 1; t <= T; ++t) {
        double ut = (u[static_cast<std::size_t>(t - 1)] - uT) * scale;
        double abar_t = ut * ut;
        s.betas[static_cast<std::size_t>(t - 1)] = 1.0 - abar_t / prev_abar;
        prev_abar = abar_t;
    }
    detail::finalize_from_betas(s);
    detail::validate_schedule(s);
    return s;
}

// KL( N(sqrt(abar_T) x0, (1-abar_T) I) || N(0, I) )
//   = 1/2 [ d ((1-abar_T) - 1 - ln(1-abar_T)) + abar_T ||x0||^2 ]
inline double terminal_kl(const Schedule& sched, const Vec& x0) {
    require(!x0.empty(), "terminal_kl: x0 must have dimension >= 1");
    require(all_finite(x0), "terminal_kl: x0 must be finite");
    const double a = sched.terminal_abar();
    require(a < 1.0, "terminal_kl: degenerate kernel (abar_T == 1)");
    const double d = static_cast<double>(x0.size());
    return 0.5 * (d * (-a - std::log1p(-a)) + a * squared_norm(x0));
}

}  // namespace omslab
