#include <doctest.h>

#include "helpers.hpp"
#include "nibm/errors.hpp"
#include "nibm/finite_n.hpp"

using namespace nibm;
using namespace nibm::finite_n;
using namespace testing_support;

namespace {

double gaussian(double x, double var) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * kPi * var); }

ContourPlan plan_at(const measure::EmpiricalMeasure& mu, double xs, int n, PlanStyle style, double time) {
    PlanParams pp;
    pp.time = time;
    return build_plan(mu, measure::scaling_frame(mu, xs, n), style, pp);
}

}  // namespace

TEST_CASE("one particle: the kernel diagonal is the Gaussian density") {
    auto mu = delta0();
    auto plan = plan_at(mu, 1.0, 1, PlanStyle::Generic, 1.0);
    CHECK(close(raw_kernel(1, mu, 1, 1, 0, 0, plan).real(), 0.3989422804014327, 1e-8));
    CHECK(close(raw_kernel(1, mu, 1, 1, 1, 1, plan).real(), 0.2419707245191434, 1e-8));
}

TEST_CASE("one particle: two-time correlation is the Markov joint density") {
    auto mu = delta0();
    auto plan = plan_at(mu, 1.0, 1, PlanStyle::Generic, 1.0);
    KernelFn k = [&](double s, double x, double t, double y) {
        return raw_kernel(1, mu, s, t, x, y, plan).value;
    };
    for (auto [x, y] : {std::pair{0.3, -0.2}, std::pair{-1.0, 0.5}, std::pair{0.8, 1.9}}) {
        double rho = correlation({{1.0, x}, {2.0, y}}, k);
        CHECK(close(rho, gaussian(x, 1.0) * gaussian(y - x, 1.0), 1e-8));
    }
}

TEST_CASE("correlation functions") {
    auto mu = two_atom();
    auto plan = plan_at(mu, 0.0, 4, PlanStyle::Generic, 0.5);
    KernelFn k = [&](double s, double x, double t, double y) {
        return raw_kernel(4, mu, s, t, x, y, plan).value;
    };
    CHECK(correlation({{0.5, 0.3}}, k) >= 0.0);
    CHECK(std::abs(correlation({{0.5, 0.3}, {0.5, 0.3}}, k)) < 1e-10);
    CHECK_THROWS_AS(correlation({{0.0, 0.3}}, k), DomainError);
}

TEST_CASE("Generic and Merging plans agree") {
    auto mu = two_atom();
    auto f = measure::scaling_frame(mu, 0.0, 16);
    auto g = build_plan(mu, f, PlanStyle::Generic);
    auto m = build_plan(mu, f, PlanStyle::Merging);
    for (auto [x, y] : {std::pair{0.0, 0.0}, std::pair{0.1, -0.05}, std::pair{-0.2, 0.15}}) {
        auto a = raw_kernel(16, mu, 1.0, 1.0, x, y, g);
        auto b = raw_kernel(16, mu, 1.0, 1.0, x, y, m);
        CHECK(std::abs(a.value - b.value) <= 1e-6);
    }
}

TEST_CASE("gauge behaviour") {
    auto mu = two_atom();
    auto f = measure::scaling_frame(mu, 0.0, 8);
    auto plan = build_plan(mu, f, PlanStyle::Generic);
    auto r = raw_kernel(8, mu, 0.9, 1.1, 0.2, -0.1, plan);
    auto q = gauged_kernel(8, mu, f, 0.9, 1.1, 0.2, -0.1, plan);
    CHECK(std::abs(r.value - q.value) <= 1e-14 * std::abs(r.value));

    auto d = delta0();
    auto fd = measure::scaling_frame(d, 1.0, 4);
    auto pd = build_plan(d, fd, PlanStyle::Generic);
    double s = 0.8, t = 1.2, x = 1.5, y = 2.1;
    auto rd = raw_kernel(4, d, s, t, x, y, pd);
    auto gd = gauged_kernel(4, d, fd, s, t, x, y, pd);
    double factor = std::exp(measure::gauge(4, fd, t, y) - measure::gauge(4, fd, s, x));
    CHECK(std::abs(gd.value - rd.value * factor) <= 1e-12 * std::abs(gd.value));

    std::vector<SpaceTimePoint> pts{{0.9, 1.4}, {1.1, 2.0}};
    KernelFn kr = [&](double a, double xa, double b, double yb) {
        return raw_kernel(4, d, a, b, xa, yb, pd).value;
    };
    KernelFn kg = [&](double a, double xa, double b, double yb) {
        return gauged_kernel(4, d, fd, a, b, xa, yb, pd).value;
    };
    double dr = correlation(pts, kr), dg = correlation(pts, kg);
    CHECK(std::abs(dr - dg) <= 1e-9 * std::abs(dr));
}

TEST_CASE("Merging plan geometry") {
    auto mu = two_atom();
    auto f = measure::scaling_frame(mu, 0.0, 64);
    auto p = build_plan(mu, f, PlanStyle::Merging);
    REQUIRE(p.anchors.size() == 2);
    double right = std::arg(p.anchors[0] - 0.0), left = std::arg(p.anchors[1] - 0.0);
    CHECK(std::abs(right - kPi / 3) < 0.2);
    CHECK(std::abs(left - 2 * kPi / 3) < 0.2);
    CHECK(p.separation > 0.0);
    CHECK(p.separation < p.disk_radius);
}

TEST_CASE("fast Airy radius") {
    auto mu = delta0();
    auto f = measure::scaling_frame(mu, 1.0, 64);
    PlanParams pp;
    pp.gamma = 0.5;
    auto p = build_plan(mu, f, PlanStyle::AiryFast, pp);
    CHECK(close(p.r_n, std::cbrt(1.0 / 128) * std::pow(64.0, 1.0 / 12), 1e-14));
}

TEST_CASE("every plan winds once around each atom") {
    measure::EmpiricalMeasure three({{-1.0, 0.25}, {0.5, 0.5}, {2.0, 0.25}});
    for (auto [mu, xs] : {std::pair{two_atom(), 0.0}, std::pair{skewed(), 0.3}, std::pair{three, 1.0},
                          std::pair{three, 3.0}, std::pair{delta0(), -0.5}}) {
        auto p = build_plan(mu, measure::scaling_frame(mu, xs, 8), PlanStyle::Generic);
        for (const auto& a : mu.atoms()) {
            int w = 0;
            for (const auto& loop : p.gamma) w += quad::winding_number(loop, a.x);
            CHECK(w == 1);
        }
    }
    CHECK_THROWS_AS(build_plan(two_atom(), measure::scaling_frame(two_atom(), 0.0, 8),
                               PlanStyle::AiryFast),
                    DomainError);
}

TEST_CASE("density normalisation and positivity") {
    auto mu = two_atom();
    const int n = 4;
    const double t = 0.5;
    double h = 0.02, total = 0, lowest = 1;
    for (double x = -4.5; x <= 4.5 + 1e-12; x += h) {
        // a line far from x cancels badly in the tails, so follow x outside the atoms
        auto plan = plan_at(mu, std::abs(x) > 1.1 ? x : 0.0, n, PlanStyle::Generic, t);
        auto k = raw_kernel(n, mu, t, t, x, x, plan);
        CHECK(k.err < 1e-8);
        double r = k.real();
        lowest = std::min(lowest, r);
        total += r * h;
    }
    CHECK(close(total, n, 1e-3));
    CHECK(lowest >= -1e-8);
}

TEST_CASE("rescaled kernels approach their limits") {
    std::vector<double> em, mm;
    for (int n : {32, 64, 128}) {
        auto fm = measure::scaling_frame(two_atom(), 0.0, n);
        RescaledRequest rq{fm, measure::TimeBranch::M, 0, 0, 0, 0};
        mm.push_back(std::abs(rescaled_kernel(two_atom(), rq, PlanStyle::Merging).value -
                              kernels::pearcey_ext({0, 0, 0, 0}).value));
        auto fe = measure::scaling_frame(delta0(), 1.0, n);
        RescaledRequest re{fe, measure::TimeBranch::E, 0, 0, 0, 0};
        em.push_back(std::abs(rescaled_kernel(delta0(), re, PlanStyle::AiryFast).value -
                              kernels::airy_ext({0, 0, 0, 0}).value));
    }
    CHECK(mm[1] < mm[0]);
    CHECK(mm[2] < mm[1]);
    CHECK(em[1] < em[0]);
    CHECK(em[2] < em[1]);
}

TEST_CASE("transition regime with calibrated base point") {
    std::vector<double> e;
    for (int n : {32, 64, 128}) {
        double xs = measure::point_with_index(two_atom(), n, 1.0, -0.9, -1e-12);
        auto row = sup_error(two_atom(), xs, n, Universality::Transition, {0.0}, {0.0}, 0.0,
                             PlanStyle::Merging);
        e.push_back(row.sup_error);
    }
    CHECK(e[1] < e[0]);
    CHECK(e[2] < e[1]);
}

TEST_CASE("reflection symmetry of the kernel") {
    auto mu = skewed();
    auto mr = mu.mirrored();
    auto p = plan_at(mu, 0.0, 6, PlanStyle::Generic, 0.7);
    auto q = plan_at(mr, 0.0, 6, PlanStyle::Generic, 0.7);
    for (auto [x, y] : {std::pair{0.2, -0.4}, std::pair{1.1, 0.9}}) {
        auto a = raw_kernel(6, mu, 0.7, 0.7, x, y, p);
        auto b = raw_kernel(6, mr, 0.7, 0.7, -x, -y, q);
        CHECK(std::abs(a.value - b.value) <= 1e-9 * std::max(1.0, std::abs(a.value)));
    }
    auto f = measure::scaling_frame(mr, 0.0, 48);
    CHECK(f.needs_mirror);
    RescaledRequest rq{f, measure::TimeBranch::M, 0, 0, 0.3, -0.2};
    auto k = rescaled_kernel(mr, rq, PlanStyle::Generic);
    CHECK(std::isfinite(k.value.real()));
}
