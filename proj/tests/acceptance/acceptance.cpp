// Runs the twelve acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "nibm/biane.hpp"
#include "nibm/finite_n.hpp"
#include "nibm/fredholm.hpp"
#include "nibm/kernels.hpp"
#include "nibm/measure.hpp"
#include "nibm/sim.hpp"

using namespace nibm;
using measure::EmpiricalMeasure;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

EmpiricalMeasure delta0() { return EmpiricalMeasure({{0.0, 1.0}}); }
EmpiricalMeasure two_atom() { return EmpiricalMeasure({{-1.0, 0.5}, {1.0, 0.5}}); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string series(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt("%.3e", v[i]);
    return "[" + s + "]";
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

Outcome conn_identity() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0;
    const std::vector<double> grid{-2.0, 0.0, 2.0};
    for (double a : {0.5, 1.0, 2.0})
        for (double tau : grid)
            for (double u : grid)
                for (double v : grid) {
                    kernels::KernelPoint p{tau, tau, u, v};
                    worst = std::max(worst, std::abs(kernels::transition(a, p).value -
                                                     kernels::conn_rhs(a, p).value));
                }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst <= 1e-8 && secs <= 120.0,
            "max violation " + fmt("%.2e", worst) + " (limit 1e-8), " + fmt("%.1f", secs) + " s (limit 120)"};
}

Outcome pearcey_at_zero() {
    std::uint64_t state = 20240521;
    auto uni = [&](double lo, double hi) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return lo + (hi - lo) * ((state >> 11) * 0x1.0p-53);
    };
    double worst_excess = -1, worst = 0;
    for (int i = 0; i < 20; ++i) {
        kernels::KernelPoint p{uni(-1, 1), uni(-1, 1), uni(-2, 2), uni(-2, 2)};
        auto t = kernels::transition(0.0, p), q = kernels::pearcey_ext(p);
        double d = std::abs(t.value - q.value);
        worst = std::max(worst, d);
        worst_excess = std::max(worst_excess, d - (1e-10 + t.err + q.err));
    }
    return {worst_excess <= 0.0, "max |difference| " + fmt("%.2e", worst) + " at 20 points"};
}

Outcome airy_limit() {
    std::vector<double> sup;
    for (double a : {5.0, 10.0, 20.0}) {
        double s = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                kernels::KernelPoint p{0, 0, -2.0 + i, -2.0 + j};
                s = std::max(s, std::abs(kernels::transition_rescaled(a, p).value -
                                         kernels::airy_ext(p).value));
            }
        sup.push_back(s);
    }
    return {strictly_decreasing(sup) && sup.back() <= 5e-2,
            "sup errors a=5,10,20: " + series(sup) + " (final limit 5e-2)"};
}

Outcome regime(finite_n::Universality target, const EmpiricalMeasure& mu,
               const std::function<double(int)>& x_star, finite_n::PlanStyle style, double limit,
               double time_limit, bool print_an = false) {
    auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> grid{-2.0, 0.0, 2.0};
    std::vector<double> sup;
    std::string extra;
    for (int n : {32, 64, 128, 256}) {
        double xs = x_star(n);
        auto row = finite_n::sup_error(mu, xs, n, target, grid, grid, 0.0, style);
        sup.push_back(row.sup_error);
        if (print_an) {
            auto f = measure::scaling_frame(mu, xs, n);
            extra += " n=" + std::to_string(n) + ":x*=" + fmt("%.5f", xs) + ",a_phase=" +
                     fmt("%.4f", f.a_phase) + ",a_n=" + fmt("%.4f", f.a);
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = strictly_decreasing(sup) && sup.back() <= limit && secs <= time_limit;
    std::string d = "sup errors n=32..256: " + series(sup) + " (final limit " + fmt("%.0e", limit) +
                    "), " + fmt("%.1f", secs) + " s";
    if (print_an) d += ";" + extra;
    return {ok, d};
}

Outcome plan_invariance() {
    auto mu = two_atom();
    auto f = measure::scaling_frame(mu, 0.0, 16);
    auto g = finite_n::build_plan(mu, f, finite_n::PlanStyle::Generic);
    auto m = finite_n::build_plan(mu, f, finite_n::PlanStyle::Merging);
    struct P {
        double s, t, x, y;
    };
    double worst = 0;
    for (P p : {P{1, 1, 0, 0}, P{1, 1, 0.1, -0.08}, P{1, 1, -0.25, 0.2}, P{1, 1, 0.3, 0.3},
                P{1, 1, -0.05, 0.12}}) {
        auto a = finite_n::raw_kernel(16, mu, p.s, p.t, p.x, p.y, g);
        auto b = finite_n::raw_kernel(16, mu, p.s, p.t, p.x, p.y, m);
        worst = std::max(worst, std::abs(a.value - b.value));
    }
    return {worst <= 1e-6, "max Generic vs Merging difference " + fmt("%.2e", worst) + " (limit 1e-6)"};
}

Outcome exact_oracle() {
    auto mu = delta0();
    finite_n::PlanParams pp;
    pp.time = 1.0;
    auto plan = finite_n::build_plan(mu, measure::scaling_frame(mu, 1.0, 1), finite_n::PlanStyle::Generic, pp);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
        double x = -2.5 + 5.0 * i / 9;
        double exact = std::exp(-x * x / 2) / std::sqrt(2 * kPi);
        worst = std::max(worst, std::abs(finite_n::raw_kernel(1, mu, 1, 1, x, x, plan).value - exact));
    }
    return {worst <= 1e-8, "max deviation from the Gaussian density " + fmt("%.2e", worst) + " (limit 1e-8)"};
}

Outcome biane_consistency() {
    double mass_dev = 0, edge_dev = 0, y_dev = 0;
    for (const auto& mu : {delta0(), two_atom()})
        for (double t : {0.5, 1.0, 2.0})
            mass_dev = std::max(mass_dev, std::abs(biane::profile_mass(biane::density_on_support(mu, t, 2000)) - 1));
    for (double t : {0.5, 1.0, 2.0}) {
        auto s = biane::support(delta0(), t);
        edge_dev = std::max({edge_dev, std::abs(s.front().lo + 2 * std::sqrt(t)),
                             std::abs(s.back().hi - 2 * std::sqrt(t))});
    }
    y_dev = std::max({std::abs(biane::y_function(delta0(), 1, 0) - 1), std::abs(biane::y_function(delta0(), 1, 2)),
                      std::abs(biane::y_function(two_atom(), 2, 0) - 1),
                      std::abs(biane::y_function(delta0(), 4, 1) - std::sqrt(3.0))});
    bool ok = mass_dev <= 1e-4 && edge_dev <= 1e-8 && y_dev <= 1e-10;
    return {ok, "mass " + fmt("%.1e", mass_dev) + " (1e-4), edges " + fmt("%.1e", edge_dev) +
                    " (1e-8), y closed forms " + fmt("%.1e", y_dev) + " (1e-10)"};
}

Outcome tw_convergence() {
    double worst = 0;
    for (double s : {-4.0, -2.0, 0.0, 2.0})
        worst = std::max(worst, std::abs(fredholm::tracy_widom_cdf(s, 48) - fredholm::tracy_widom_cdf(s, 96)));
    bool monotone = true;
    double prev = -1;
    for (int i = 0; i <= 40; ++i) {
        double f = fredholm::tracy_widom_cdf(-6 + 0.25 * i);
        monotone = monotone && f >= prev;
        prev = f;
    }
    return {worst <= 1e-6 && monotone,
            "|F48 - F96| max " + fmt("%.2e", worst) + " (limit 1e-6), monotone on [-6,4]: " +
                (monotone ? "yes" : "no")};
}

Outcome simulation() {
    auto cfg = sim::SimConfig::from_measure(delta0(), 200, {1.0}, sim::Method::Matrix, 2024);
    auto a = sim::simulate(cfg, 64);
    double ks = sim::ks_distance(a.pooled(0), sim::deterministic_cdf(delta0(), 1.0));
    auto b = sim::simulate(cfg, 64);
    bool same = a.values.size() == b.values.size() &&
                std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0;
    sim::SimConfig pair;
    pair.n = 2;
    pair.start = {-0.5, 0.5};
    pair.t_grid = {0.1, 0.3, 0.6};
    pair.dt = 1e-7;
    pair.method = sim::Method::SDE;
    pair.noise = false;
    auto p = sim::simulate(pair, 1);
    double gap_dev = 0;
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        double g = p.at(0, i, 1) - p.at(0, i, 0);
        gap_dev = std::max(gap_dev, std::abs(g * g - (1.0 + 2 * p.times[i])));
    }
    bool ok = ks <= 0.05 && same && gap_dev <= 1e-6;
    return {ok, "KS " + fmt("%.4f", ks) + " (limit 0.05), bit-identical rerun: " + (same ? "yes" : "no") +
                    ", gap law deviation " + fmt("%.1e", gap_dev) + " (limit 1e-6)"};
}

Outcome merging_point() {
    EmpiricalMeasure mu({{-1.0, 2.0 / 3.0}, {1.0, 1.0 / 3.0}});
    double x = biane::merging_initial_point(mu, {-1, 1});
    double root = 2 * std::pow(1 - x, 3) - std::pow(1 + x, 3);
    bool ok = std::abs(x - 0.115013) <= 1e-6 && std::abs(root) <= 1e-9;
    return {ok, "x = " + fmt("%.9f", x) + ", residual of 2(1-x)^3 - (1+x)^3 = " + fmt("%.1e", root)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    using finite_n::PlanStyle;
    using finite_n::Universality;
    std::vector<Criterion> all{
        {"connection identity", conn_identity},
        {"transition at a = 0 equals Pearcey", pearcey_at_zero},
        {"rescaled transition tends to Airy", airy_limit},
        {"Pearcey regime convergence",
         [] { return regime(Universality::Pearcey, two_atom(), [](int) { return 0.0; }, PlanStyle::Merging, 5e-2, 900); }},
        {"Airy regime convergence",
         [] { return regime(Universality::Airy, delta0(), [](int) { return 1.0; }, PlanStyle::AiryFast, 5e-2, 900); }},
        {"transition regime convergence",
         [] {
             return regime(Universality::Transition, two_atom(),
                           [](int n) { return measure::point_with_index(two_atom(), n, 1.0, -0.9, -1e-12); },
                           PlanStyle::Merging, 1e-1, 900, true);
         }},
        {"contour invariance", plan_invariance},
        {"one-particle exact kernel", exact_oracle},
        {"free convolution consistency", biane_consistency},
        {"Tracy-Widom self-convergence", tw_convergence},
        {"simulation", simulation},
        {"merging initial point", merging_point},
    };
    int failed = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        Outcome o;
        try {
            o = all[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("criterion %2zu %s: %s | %s\n", i + 1, o.pass ? "PASS" : "FAIL", all[i].name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed;
}
