#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace omslab {

using Vec = std::vector<double>;

// Raised where an epsilon-parameterization is evaluated at zero SNR, where it
// is undefined. Distinct from invalid_argument so callers can route around it.
struct SingularParamError : std::domain_error {
    using std::domain_error::domain_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_same_dim(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(squared_norm(a)); }

inline double mean(const Vec& a) {
    double s = 0.0;
    for (double v : a) s += v;
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

// r = ca*a + cb*b, elementwise
inline Vec lin_comb(double ca, const Vec& a, double cb, const Vec& b) {
    require_same_dim(a, b, "lin_comb");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = ca * a[i] + cb * b[i];
    return r;
}

inline Vec scaled(double c, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline bool all_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace omslab
