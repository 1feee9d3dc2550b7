#include <doctest.h>

#include <cmath>
#include <vector>

#include "omslab/rng.hpp"

using namespace omslab;

TEST_CASE("rng: identical seeds give identical sequences") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(1234), d(1235);
    int same = 0;
    for (int i = 0; i < 1000; ++i)
        if (c.next_u64() == d.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("rng: substreams are reproducible and tag-sensitive") {
    Rng a = Rng::stream(7, {stream_tag::kChain, 3});
    Rng b = Rng::stream(7, {stream_tag::kChain, 3});
    Rng c = Rng::stream(7, {stream_tag::kChain, 4});
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
}

TEST_CASE("rng: uniform01 range and mean") {
    Rng rng(99);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc += u;
    }
    CHECK(std::abs(acc / n - 0.5) < 0.005);
}

TEST_CASE("rng: normal moments") {
    Rng rng(42);
    const long long n = 4000000;
    double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    for (long long i = 0; i < n; ++i) {
        double v = rng.normal();
        m1 += v;
        m2 += v * v;
        m3 += v * v * v;
        m4 += v * v * v * v;
    }
    m1 /= n; m2 /= n; m3 /= n; m4 /= n;
    // standard errors: 5e-4, 7e-4, ~2e-3, ~5e-3; allow 5 sigma
    CHECK(std::abs(m1) < 2.5e-3);
    CHECK(std::abs(m2 - 1.0) < 3.5e-3);
    CHECK(std::abs(m3) < 1e-2);
    CHECK(std::abs(m4 - 3.0) < 2.5e-2);
}

TEST_CASE("rng: normal tail fractions match erfc") {
    Rng rng(7);
    const long long n = 8000000;
    long long c1 = 0, c2 = 0, c3 = 0;
    for (long long i = 0; i < n; ++i) {
        double v = std::fabs(rng.normal());
        if (v > 1.0) ++c1;
        if (v > 2.0) ++c2;
        if (v > 3.0) ++c3;
    }
    auto expect = [](double c) { return std::erfc(c / std::sqrt(2.0)); };
    auto tol = [&](double p) { return 5.0 * std::sqrt(p / 8000000.0); };
    CHECK(std::abs(static_cast<double>(c1) / n - expect(1.0)) < tol(expect(1.0)));
    CHECK(std::abs(static_cast<double>(c2) / n - expect(2.0)) < tol(expect(2.0)));
    CHECK(std::abs(static_cast<double>(c3) / n - expect(3.0)) < tol(expect(3.0)));
}

TEST_CASE("rng: ziggurat tables close at the top") {
    const auto& zt = detail::ZigguratTables::get_for_test();
    // last strip area equals the common strip area
    double top = zt.x[127] * (1.0 - std::exp(-0.5 * zt.x[127] * zt.x[127]));
    CHECK(top == doctest::Approx(detail::ZigguratTables::kV).epsilon(1e-8));
    for (int i = 0; i < 128; ++i) CHECK(zt.x[i] > zt.x[i + 1]);
}
