#include <doctest.h>

#include "helpers.hpp"
#include "nibm/errors.hpp"

using namespace nibm;
using namespace nibm::measure;
using namespace testing_support;

TEST_CASE("stieltjes transform values") {
    CHECK(std::abs(stieltjes(delta0(), {0, 1}) - cplx(0, -1)) < 1e-15);
    CHECK(std::abs(stieltjes(two_atom(), 0.0)) < 1e-15);
    CHECK(std::abs(stieltjes(delta0(), 2.0) - 0.5) < 1e-15);
}

TEST_CASE("jet at x*") {
    auto j = jet_at(delta0(), 1.0);
    CHECK(close(j.g0, 1, 1e-14));
    CHECK(close(j.g1, -1, 1e-14));
    CHECK(close(j.g2, 2, 1e-14));
    CHECK(close(j.g3, -6, 1e-14));
    j = jet_at(two_atom(), 0.0);
    CHECK(close(j.g0, 0, 1e-14));
    CHECK(close(j.g1, -1, 1e-14));
    CHECK(close(j.g2, 0, 1e-14));
    CHECK(close(j.g3, -6, 1e-14));
    j = jet_at(skewed(), 0.0);
    CHECK(close(j.g0, 1.0 / 3, 1e-14));
    CHECK(close(j.g1, -1, 1e-14));
    CHECK(close(j.g2, 2.0 / 3, 1e-14));
    CHECK(close(j.g3, -6, 1e-14));
}

TEST_CASE("log transform on the principal branch") {
    CHECK(std::abs(log_transform(delta0(), 1.0)) < 1e-15);
    CHECK(std::abs(log_transform(delta0(), {0, 1}) - cplx(0, kPi / 2)) < 1e-15);
    cplx z(0, 2);
    cplx oracle = 0.5 * std::log(z + 1.0) + 0.5 * std::log(z - 1.0);
    CHECK(std::abs(log_transform(two_atom(), z) - oracle) < 1e-14);
}

TEST_CASE("fifth-moment check") {
    auto a = check_assumption2(delta0(), 1.0, 2.0);
    CHECK(a.pass);
    CHECK(close(a.fifth_moment, 1, 1e-14));
    a = check_assumption2(delta0(), 0.5, 2.0);
    CHECK_FALSE(a.pass);
    CHECK(close(a.fifth_moment, 32, 1e-12));
    a = check_assumption2(two_atom(), 0.0, 2.0);
    CHECK(a.pass);
    CHECK(close(a.fifth_moment, 1, 1e-14));
}

TEST_CASE("critical time and linear evolution") {
    CHECK(close(critical_time(delta0(), 1.0), 1, 1e-14));
    CHECK(close(critical_time(two_atom(), 0.0), 1, 1e-14));
    CHECK(close(critical_time(delta0(), 2.0), 4, 1e-13));
    CHECK(close(evolve(delta0(), 1.0, 1.0), 2, 1e-14));
    CHECK(close(evolve(two_atom(), 0.0, 1.0), 0, 1e-14));
    CHECK(close(evolve(skewed(), 0.0, 3.0), 1, 1e-14));
}

TEST_CASE("scaling frames") {
    auto f = scaling_frame(delta0(), 1.0, 16);
    CHECK(close(f.index_I, 2, 1e-14));
    CHECK(close(f.c2, 1, 1e-14));
    CHECK(close(f.c3, 1, 1e-14));
    f = scaling_frame(two_atom(), 0.0, 100);
    CHECK(close(f.index_I, 0, 1e-14));
    CHECK(close(f.a, 0, 1e-14));
    CHECK(close(f.c3, 1, 1e-14));
    CHECK(f.regime == Regime::PearceyMerging);
    f = scaling_frame(skewed(), 0.0, 81);
    CHECK(close(f.index_I, 1, 1e-14));
}

TEST_CASE("time scaling") {
    auto f = scaling_frame(delta0(), 1.0, 8);
    CHECK(close(time_scaling(f, 0.0, TimeBranch::E), 1, 1e-14));
    CHECK(close(time_scaling(f, 1.0, TimeBranch::E), 2, 1e-14));
    auto g = scaling_frame(two_atom(), 0.0, 16);
    CHECK(close(time_scaling(g, 2.0, TimeBranch::M), 1.5, 1e-14));
}

TEST_CASE("gauge") {
    auto f = scaling_frame(two_atom(), 0.0, 10);
    for (double s : {0.1, 1.0, 3.0})
        for (double x : {-2.0, 0.0, 5.0}) CHECK(gauge(10, f, s, x) == 0.0);
    CHECK(close(gauge(2, scaling_frame(delta0(), 1.0, 2), 1.0, 1.0), -1, 1e-14));
    CHECK(close(gauge(1, scaling_frame(delta0(), 2.0, 1), 0.0, 3.0), -1.5, 1e-14));
}

TEST_CASE("index calibration") {
    for (int n : {32, 256}) {
        double x = point_with_index(two_atom(), n, 1.0, -0.9, -1e-12);
        CHECK(close(scaling_frame(two_atom(), x, n).index_I, 1.0, 1e-10));
    }
    CHECK_THROWS_AS(point_with_index(two_atom(), 32, 1.0, 0.1, 0.5), DomainError);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(EmpiricalMeasure({}), DomainError);
    CHECK_THROWS_AS(EmpiricalMeasure({{0.0, 0.5}}), DomainError);
    CHECK_THROWS_AS(scaling_frame(two_atom(), 1.0, 10), DomainError);
    CHECK_THROWS_AS(EmpiricalMeasure::from_json("{\"atoms\": 3}"), DomainError);
    auto m = EmpiricalMeasure::from_json("{\"atoms\": [{\"x\": 1}, {\"x\": -1}]}");
    CHECK(m.size() == 2);
    CHECK(close(m.atoms()[0].w, 0.5, 1e-15));
    CHECK(m.multiplicities(4) == std::vector<int>{2, 2});
    CHECK_THROWS_AS(m.multiplicities(3), DomainError);
}
