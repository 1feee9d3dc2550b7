#pragma once

// Conversions between the epsilon-, v- and x0-prediction parameterizations of
// a variance-preserving diffusion step, plus the angular (phi) view in which
// the deterministic DDIM update is a plane rotation.

#include <cmath>
#include <numbers>

#include "omslab/vecmath.hpp"

namespace omslab {

struct Prediction {
    enum class Kind { epsilon, v, x0 };
    Kind kind = Kind::epsilon;
    Vec values;
};

inline const char* prediction_kind_name(Prediction::Kind k) {
    switch (k) {
        case Prediction::Kind::epsilon: return "epsilon";
        case Prediction::Kind::v: return "v";
        case Prediction::Kind::x0: return "x0";
    }
    return "?";
}

// v = sqrt(abar) eps - sqrt(1-abar) x0
inline Vec v_from_x0_eps(const Vec& x0, const Vec& eps, double abar) {
    require_same_dim(x0, eps, "v_from_x0_eps");
    return lin_comb(std::sqrt(abar), eps, -std::sqrt(1.0 - abar), x0);
}

// x0 = sqrt(abar) x_t - sqrt(1-abar) v
inline Vec x0_from_v(const Vec& xt, const Vec& v, double abar) {
    require_same_dim(xt, v, "x0_from_v");
    return lin_comb(std::sqrt(abar), xt, -std::sqrt(1.0 - abar), v);
}

// x0 = (x_t - sqrt(1-abar) eps) / sqrt(abar); undefined at abar == 0.
inline Vec x0_from_eps(const Vec& xt, const Vec& eps, double abar) {
    require_same_dim(xt, eps, "x0_from_eps");
    if (abar == 0.0)
        throw SingularParamError(
            "x0_from_eps: epsilon parameterization is singular at zero SNR; "
            "use a v- or x0-prediction instead");
    double s = 1.0 / std::sqrt(abar);
    return lin_comb(s, xt, -std::sqrt(1.0 - abar) * s, eps);
}

// eps = sin(phi) z_t + cos(phi) v, with sin(phi) = sqrt(1-abar), cos(phi) = sqrt(abar)
inline Vec eps_from_v(const Vec& zt, const Vec& v, double abar) {
    require_same_dim(zt, v, "eps_from_v");
    return lin_comb(std::sqrt(1.0 - abar), zt, std::sqrt(abar), v);
}

// phi = arctan(sqrt(1-abar)/sqrt(abar)) in [0, pi/2]; abar == 0 maps to pi/2.
inline double phi_of(double abar) {
    require(abar >= 0.0 && abar <= 1.0, "phi_of: abar must be in [0,1]");
    if (abar == 0.0) return std::numbers::pi / 2.0;
    return std::atan2(std::sqrt(1.0 - abar), std::sqrt(abar));
}

// z_{phi - delta} = cos(delta) z_phi - sin(delta) v_hat
inline Vec ddim_rotate(const Vec& z_phi, const Vec& v_hat, double delta) {
    require_same_dim(z_phi, v_hat, "ddim_rotate");
    return lin_comb(std::cos(delta), z_phi, -std::sin(delta), v_hat);
}

// x0 implied by a prediction of any kind at noise level abar.
inline Vec x0_from_prediction(const Vec& xt, const Prediction& pred, double abar) {
    switch (pred.kind) {
        case Prediction::Kind::epsilon: return x0_from_eps(xt, pred.values, abar);
        case Prediction::Kind::v: return x0_from_v(xt, pred.values, abar);
        case Prediction::Kind::x0: return pred.values;
    }
    throw std::invalid_argument("x0_from_prediction: unknown prediction kind");
}

}  // namespace omslab
