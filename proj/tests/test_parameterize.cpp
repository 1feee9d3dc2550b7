#include <doctest.h>

#include <cmath>
#include <numbers>

#include "omslab/parameterize.hpp"
#include "omslab/rng.hpp"

using namespace omslab;

namespace {

Vec random_vec(Rng& rng, std::size_t d) {
    Vec v(d);
    for (auto& x : v) x = rng.normal();
    return v;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("v_from_x0_eps limits") {
    Vec x0{1.0, -2.0, 0.5};
    Vec eps{0.3, 0.7, -1.1};
    CHECK(max_abs_diff(v_from_x0_eps(x0, eps, 0.0), scaled(-1.0, x0)) == 0.0);
    CHECK(max_abs_diff(v_from_x0_eps(x0, eps, 1.0), eps) == 0.0);
    CHECK(max_abs_diff(v_from_x0_eps(Vec(3, 0.0), eps, 0.3),
                       scaled(std::sqrt(0.3), eps)) < 1e-15);
    CHECK_THROWS_AS(v_from_x0_eps(x0, Vec{1.0}, 0.5), std::invalid_argument);
}

TEST_CASE("x0_from_v limits and round trip") {
    Vec v{0.1, 0.2};
    Vec xt{1.0, -1.0};
    CHECK(max_abs_diff(x0_from_v(xt, v, 0.0), scaled(-1.0, v)) == 0.0);
    CHECK(max_abs_diff(x0_from_v(xt, v, 1.0), xt) == 0.0);

    Rng rng(11);
    for (double abar : {0.05, 0.3, 0.5, 0.9, 0.999}) {
        Vec x0 = random_vec(rng, 8);
        Vec eps = random_vec(rng, 8);
        Vec xt2 = lin_comb(std::sqrt(abar), x0, std::sqrt(1.0 - abar), eps);
        Vec vv = v_from_x0_eps(x0, eps, abar);
        CHECK(max_abs_diff(x0_from_v(xt2, vv, abar), x0) < 1e-12);
    }
}

TEST_CASE("x0_from_eps inverts the forward construction, singular at zero SNR") {
    Rng rng(12);
    Vec x0 = random_vec(rng, 6);
    Vec eps = random_vec(rng, 6);
    for (double abar : {1e-6, 0.2, 0.7, 1.0}) {
        Vec xt = lin_comb(std::sqrt(abar), x0, std::sqrt(1.0 - abar), eps);
        CHECK(max_abs_diff(x0_from_eps(xt, eps, abar), x0) < 1e-9 / abar);
    }
    Vec xt{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    CHECK(max_abs_diff(x0_from_eps(xt, eps, 1.0), xt) == 0.0);
    CHECK_THROWS_AS(x0_from_eps(xt, eps, 0.0), SingularParamError);
}

TEST_CASE("eps_from_v limits and triple consistency") {
    Rng rng(13);
    Vec zt = random_vec(rng, 5);
    Vec v = random_vec(rng, 5);
    CHECK(max_abs_diff(eps_from_v(zt, v, 0.0), zt) == 0.0);
    CHECK(max_abs_diff(eps_from_v(zt, v, 1.0), v) == 0.0);
    for (double abar : {0.1, 0.45, 0.8}) {
        Vec x0 = x0_from_v(zt, v, abar);
        Vec eps = eps_from_v(zt, v, abar);
        CHECK(max_abs_diff(v_from_x0_eps(x0, eps, abar), v) < 1e-12);
    }
}

TEST_CASE("phi_of endpoints and symmetry") {
    CHECK(phi_of(1.0) == 0.0);
    CHECK(phi_of(0.0) == std::numbers::pi / 2.0);
    CHECK(phi_of(0.5) == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-15));
    CHECK_THROWS_AS(phi_of(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(phi_of(1.1), std::invalid_argument);
}

TEST_CASE("ddim_rotate identities") {
    Rng rng(14);
    Vec z = random_vec(rng, 7);
    Vec v = random_vec(rng, 7);
    CHECK(max_abs_diff(ddim_rotate(z, v, 0.0), z) == 0.0);

    // a full rotation by phi_t maps the noised latent back to x0 when the
    // velocity is exact
    for (double abar : {0.1, 0.5, 0.95}) {
        Vec x0 = random_vec(rng, 7);
        Vec eps = random_vec(rng, 7);
        Vec zt = lin_comb(std::sqrt(abar), x0, std::sqrt(1.0 - abar), eps);
        Vec vt = v_from_x0_eps(x0, eps, abar);
        CHECK(max_abs_diff(ddim_rotate(zt, vt, phi_of(abar)), x0) < 1e-10);
    }
}

TEST_CASE("angular identity battery") {
    // forward x_t satisfies x0 = cos(phi) x_t - sin(phi) v and
    // eps = sin(phi) x_t + cos(phi) v with v = cos(phi) eps - sin(phi) x0
    Rng rng(15);
    for (double abar : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        double phi = phi_of(abar);
        double cp = std::cos(phi), sp = std::sin(phi);
        for (int trial = 0; trial < 100; ++trial) {
            Vec x0 = random_vec(rng, 4);
            Vec eps = random_vec(rng, 4);
            Vec xt = lin_comb(std::sqrt(abar), x0, std::sqrt(1.0 - abar), eps);
            Vec v = lin_comb(cp, eps, -sp, x0);
            CHECK(max_abs_diff(lin_comb(cp, xt, -sp, v), x0) < 1e-12);
            CHECK(max_abs_diff(lin_comb(sp, xt, cp, v), eps) < 1e-12);
            CHECK(max_abs_diff(v_from_x0_eps(x0, eps, abar), v) < 1e-12);
        }
    }
}

TEST_CASE("x0_from_eps and x0_from_v agree for consistent predictions") {
    Rng rng(16);
    for (int trial = 0; trial < 50; ++trial) {
        double abar = 1e-6 + rng.uniform01() * (1.0 - 2e-6);
        Vec x0 = random_vec(rng, 6);
        Vec eps = random_vec(rng, 6);
        Vec xt = lin_comb(std::sqrt(abar), x0, std::sqrt(1.0 - abar), eps);
        Vec v = v_from_x0_eps(x0, eps, abar);
        CHECK(max_abs_diff(x0_from_eps(xt, eps, abar), x0_from_v(xt, v, abar)) < 1e-10);
    }
}
