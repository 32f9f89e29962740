#include <doctest.h>

#include "helpers.hpp"
#include "nibm/errors.hpp"
#include "nibm/kernels.hpp"

using namespace nibm;
using namespace nibm::kernels;
using namespace testing_support;

TEST_CASE("heat term conventions") {
    CHECK(heat_term({0.3, 0.3, 0.1, 0.7}, HeatConvention::Quarter) == 0.0);
    CHECK(close(heat_term({1 / (4 * kPi), 0, 0.4, 0.4}, HeatConvention::Quarter), 1, 1e-14));
    CHECK(close(heat_term({1 / (2 * kPi), 0, -0.4, -0.4}, HeatConvention::Half), 1, 1e-14));
}

TEST_CASE("Airy function values") {
    auto a = airy_function(0.0);
    CHECK(close(a.ai, 0.3550280539, 1e-10));
    CHECK(close(a.ai_prime, -0.2588194038, 1e-10));
    auto s = airy_series(3.0), c = airy_contour(3.0);
    CHECK(close(s.ai, c.ai, 1e-10));
    CHECK(close(s.ai_prime, c.ai_prime, 1e-10));
}

TEST_CASE("extended Airy kernel") {
    double ap = airy_series(0.0).ai_prime;
    auto k = airy_ext({0, 0, 0, 0});
    CHECK(close(k.real(), ap * ap, 1e-10));
    CHECK(close(k.real(), 0.06698748378, 1e-10));
    CHECK(close(airy_ext({0, 0, 0, 1}).real(), airy_ext({0, 0, 1, 0}).real(), 1e-10));
    auto deep = airy_ext({0, 0, 8, 8});
    CHECK(std::abs(deep.value) < 1e-6);
    CHECK(close(deep.real(), static_airy_kernel(8, 8), 1e-10));
}

TEST_CASE("extended Airy kernel: contour route vs lambda route") {
    for (KernelPoint p : {KernelPoint{0, 0, 0.5, -0.3}, KernelPoint{0.4, -0.2, 0.1, 0.6},
                          KernelPoint{-0.3, 0.5, -1.0, 0.2}, KernelPoint{1.0, 0.0, 0.0, 0.0}}) {
        auto a = airy_ext(p);
        CHECK(close(a.real(), airy_ext_lambda(p), 1e-8));
    }
}

TEST_CASE("Pearcey kernel") {
    auto k = pearcey_ext({0.2, 0.2, 0, 0});
    CHECK(k.real() > 0.0);
    KernelOptions alt;
    alt.pearcey_angle = kPi / 7;
    for (KernelPoint p : {KernelPoint{0, 0, 0.3, -0.5}, KernelPoint{0.5, -0.2, 1.0, 0.4}}) {
        auto a = pearcey_ext(p), b = pearcey_ext(p, alt);
        CHECK(std::abs(a.value - b.value) <= 1e-10 + a.err + b.err);
    }
    for (double u : {-1.0, 0.5})
        for (double v : {-0.7, 1.2})
            CHECK(close(pearcey_ext({0, 0, u, v}).real(), pearcey_ext({0, 0, -u, -v}).real(), 1e-10));
    CHECK_THROWS_AS(pearcey_ext({0, 0, 0, 0}, KernelOptions{1e-12, 0.5, 0.1}), DomainError);
}

TEST_CASE("transition kernel special cases") {
    KernelPoint p{0.3, -0.1, 0.4, -0.6};
    CHECK(std::abs(transition(0, p).value - pearcey_ext(p).value) < 1e-10);
    CHECK(std::abs(conn_rhs(0, p).value - pearcey_ext(p).value) < 1e-10);
    CHECK(std::abs(transition(1, {0, 0, 0, 0}).value - conn_rhs(1, {0, 0, 0, 0}).value) < 1e-8);
    KernelPoint q{0.5, -0.5, 1, -1};
    CHECK(std::abs(transition(2, q).value - conn_rhs(2, q).value) < 1e-8);
    CHECK_THROWS_AS(transition(-1, p), DomainError);
}

TEST_CASE("rescaled transition approaches Airy") {
    double worst = 0;
    for (double u : {-2.0, 0.0, 2.0}) {
        KernelPoint p{0, 0, u, u};
        worst = std::max(worst, std::abs(transition_rescaled(20, p).value - airy_ext(p).value));
    }
    CHECK(worst <= 5e-2);
}

TEST_CASE("equal-time kernels are real") {
    for (double u : {-1.5, 0.0, 1.0}) {
        auto a = airy_ext({0.3, 0.3, u, 0.2});
        auto p = pearcey_ext({-0.4, -0.4, u, 0.2});
        auto t = transition(0.7, {0.1, 0.1, u, 0.2});
        CHECK(std::abs(a.value.imag()) <= std::max(10 * a.err, 1e-13));
        CHECK(std::abs(p.value.imag()) <= std::max(10 * p.err, 1e-13));
        CHECK(std::abs(t.value.imag()) <= std::max(10 * t.err, 1e-13));
    }
}
