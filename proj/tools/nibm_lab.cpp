#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nibm/biane.hpp"
#include "nibm/errors.hpp"
#include "nibm/finite_n.hpp"
#include "nibm/fredholm.hpp"
#include "nibm/kernels.hpp"
#include "nibm/measure.hpp"
#include "nibm/sim.hpp"

using nlohmann::ordered_json;
using namespace nibm;

namespace {

constexpr const char* kHeader = "nibm-lab v1";

struct Global {
    std::uint64_t seed = 1;
    double tol = 1e-12;
    std::string out = "-";
};

// Writes to --out (or stdout) with the header and config echo on top.
class Sink {
public:
    Sink(const std::string& path, const std::string& command, const ordered_json& config) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw DomainError("cannot open output file " + path);
        }
        os() << "# " << kHeader << "\n# command: " << command << "\n# config: " << config.dump()
             << "\n";
        os() << std::setprecision(15);
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::vector<double> linspace(double lo, double hi, int steps) {
    if (steps < 1) throw DomainError("grid needs at least one step");
    if (steps == 1) return {lo};
    std::vector<double> g(steps);
    for (int i = 0; i < steps; ++i) g[i] = lo + (hi - lo) * i / (steps - 1);
    return g;
}

template <class T>
std::vector<T> parse_list(const std::string& text) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::stringstream is(item);
        T v;
        if (!(is >> v)) throw DomainError("cannot parse list item '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw DomainError("empty list");
    return out;
}

measure::EmpiricalMeasure two_atom() { return measure::EmpiricalMeasure({{-1.0, 0.5}, {1.0, 0.5}}); }
measure::EmpiricalMeasure delta0() { return measure::EmpiricalMeasure({{0.0, 1.0}}); }

measure::EmpiricalMeasure load_or(const std::string& path, measure::EmpiricalMeasure fallback) {
    return path.empty() ? fallback : measure::EmpiricalMeasure::load(path);
}

ordered_json frame_json(const measure::ScalingFrame& f) {
    ordered_json j;
    j["x_star"] = f.x_star;
    j["n"] = f.n;
    j["G0"] = f.jet.g0;
    j["G1"] = f.jet.g1;
    j["G2"] = f.jet.g2;
    j["G3"] = f.jet.g3;
    j["t_cr"] = f.t_cr;
    j["I_n"] = f.index_I;
    j["c2"] = std::isfinite(f.c2) ? ordered_json(f.c2) : ordered_json(nullptr);
    j["c3"] = f.c3;
    j["a_n"] = f.a;
    j["a_phase"] = f.a_phase;
    j["regime"] = measure::regime_name(f.regime);
    j["needs_mirror"] = f.needs_mirror;
    return j;
}

finite_n::PlanStyle plan_from_flag(const std::string& s) {
    if (s == "generic") return finite_n::PlanStyle::Generic;
    if (s == "airy-fast") return finite_n::PlanStyle::AiryFast;
    if (s == "airy-slow") return finite_n::PlanStyle::AirySlow;
    if (s == "merging") return finite_n::PlanStyle::Merging;
    return finite_n::parse_plan_style(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernels, gap probabilities and simulations for non-intersecting Brownian motions"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--tol", g.tol, "Relative quadrature tolerance")->capture_default_str();
    app.add_option("--out", g.out, "Output path, - for stdout")->capture_default_str();

    // classify
    auto* classify = app.add_subcommand("classify", "Scaling frame and regime at x*");
    std::string c_measure;
    double c_xstar = 0, c_low = 0.2, c_high = 5.0, c_bound = 1e6;
    int c_n = 100;
    classify->add_option("--measure", c_measure, "Measure JSON")->required();
    classify->add_option("--xstar", c_xstar, "Initial point x*")->required();
    classify->add_option("--n", c_n, "Number of paths")->capture_default_str();
    classify->add_option("--low", c_low, "Pearcey threshold on |I_n|")->capture_default_str();
    classify->add_option("--high", c_high, "Airy threshold on |I_n|")->capture_default_str();
    classify->add_option("--bound-c", c_bound, "Fifth-moment bound")->capture_default_str();

    // density
    auto* density = app.add_subcommand("density", "Density of the deterministic equivalent");
    std::string d_measure;
    double d_t = 1.0;
    int d_nodes = 200;
    density->add_option("--measure", d_measure, "Measure JSON")->required();
    density->add_option("--t", d_t, "Time")->capture_default_str();
    density->add_option("--nodes", d_nodes, "Nodes per support interval")->capture_default_str();

    // kernel
    auto* kernel = app.add_subcommand("kernel", "Kernel values on a (u, v) grid");
    std::string k_family = "airy", k_measure, k_branch = "M", k_plan = "generic";
    double k_a = 1.0, k_tau1 = 0, k_tau2 = 0, k_umin = -2, k_umax = 2, k_vmin = -2, k_vmax = 2,
           k_xstar = 0;
    int k_usteps = 5, k_vsteps = 5, k_n = 64;
    kernel->add_option("--family", k_family, "airy | pearcey | transition | finite")
        ->check(CLI::IsMember({"airy", "pearcey", "transition", "finite"}))
        ->capture_default_str();
    kernel->add_option("--a", k_a, "Transition parameter")->capture_default_str();
    kernel->add_option("--tau1", k_tau1)->capture_default_str();
    kernel->add_option("--tau2", k_tau2)->capture_default_str();
    kernel->add_option("--u-min", k_umin)->capture_default_str();
    kernel->add_option("--u-max", k_umax)->capture_default_str();
    kernel->add_option("--u-steps", k_usteps)->capture_default_str();
    kernel->add_option("--v-min", k_vmin)->capture_default_str();
    kernel->add_option("--v-max", k_vmax)->capture_default_str();
    kernel->add_option("--v-steps", k_vsteps)->capture_default_str();
    kernel->add_option("--measure", k_measure, "Measure JSON (finite family)");
    kernel->add_option("--xstar", k_xstar)->capture_default_str();
    kernel->add_option("--n", k_n)->capture_default_str();
    kernel->add_option("--branch", k_branch, "Time scaling E | M")
        ->check(CLI::IsMember({"E", "M"}))
        ->capture_default_str();
    kernel->add_option("--plan", k_plan, "generic | airy-fast | airy-slow | merging")
        ->capture_default_str();

    // converge
    auto* converge = app.add_subcommand("converge", "Sup errors of the rescaled kernel by n");
    std::string v_regime = "M", v_measure, v_nseq = "32,64,128,256", v_plan;
    double v_range = 2.0, v_tau = 0.0, v_gamma = 0.5, v_eps = 0.04, v_index = 1.0;
    double v_xstar = std::nan("");
    int v_steps = 3;
    converge->add_option("--regime", v_regime, "E | M | T")
        ->check(CLI::IsMember({"E", "M", "T"}))
        ->capture_default_str();
    converge->add_option("--measure", v_measure, "Measure JSON (default: delta_0 for E, two atoms otherwise)");
    converge->add_option("--xstar", v_xstar, "x* (default 1 for E, 0 for M; T calibrates)");
    converge->add_option("--n-seq", v_nseq, "Increasing n values")->capture_default_str();
    converge->add_option("--range", v_range, "Grid half-width M")->capture_default_str();
    converge->add_option("--steps", v_steps, "Grid points per axis")->capture_default_str();
    converge->add_option("--tau", v_tau)->capture_default_str();
    converge->add_option("--plan", v_plan, "Contour plan (default by regime)");
    converge->add_option("--gamma", v_gamma, "Fast-Airy radius exponent")->capture_default_str();
    converge->add_option("--epsilon", v_eps, "Merging disk exponent offset")->capture_default_str();
    converge->add_option("--index", v_index, "Target I_n for T")->capture_default_str();

    // tw
    auto* tw = app.add_subcommand("tw", "Tracy-Widom CDF table");
    double t_min = -6, t_max = 4, t_step = 0.25, t_cut = 14.0;
    int t_order = 48;
    tw->add_option("--s-min", t_min)->capture_default_str();
    tw->add_option("--s-max", t_max)->capture_default_str();
    tw->add_option("--s-step", t_step)->capture_default_str();
    tw->add_option("--order", t_order, "Gauss-Legendre nodes")->capture_default_str();
    tw->add_option("--cutoff", t_cut, "Truncation length R")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo paths");
    std::string s_measure, s_times = "1", s_method = "matrix", s_summary;
    int s_n = 50;
    std::size_t s_reps = 8;
    double s_dt = 1e-3;
    simulate->add_option("--measure", s_measure, "Measure JSON (default delta_0)");
    simulate->add_option("--n", s_n)->capture_default_str();
    simulate->add_option("--times", s_times, "Comma separated output times")->capture_default_str();
    simulate->add_option("--replicas", s_reps)->capture_default_str();
    simulate->add_option("--method", s_method, "matrix | sde")
        ->check(CLI::IsMember({"matrix", "sde"}))
        ->capture_default_str();
    simulate->add_option("--dt", s_dt, "SDE step")->capture_default_str();
    simulate->add_option("--summary", s_summary, "Summary JSON path");

    // conn
    auto* conn = app.add_subcommand("conn", "Check the transition/Airy connection identity");
    std::string n_alist = "0.5,1,2";
    int n_steps = 3;
    double n_range = 2.0;
    conn->add_option("--a-list", n_alist)->capture_default_str();
    conn->add_option("--steps", n_steps, "Points per axis of the (tau, u, v) grid")->capture_default_str();
    conn->add_option("--range", n_range)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        ordered_json cfg;
        cfg["seed"] = g.seed;
        cfg["tol"] = g.tol;

        if (*classify) {
            auto mu = measure::EmpiricalMeasure::load(c_measure);
            auto f = measure::scaling_frame(mu, c_xstar, c_n, {c_low, c_high});
            auto bp = biane::boundary_point(mu, c_xstar);
            auto a2 = measure::check_assumption2(mu, c_xstar, c_bound);
            cfg["measure"] = c_measure;
            cfg["xstar"] = c_xstar;
            cfg["n"] = c_n;
            cfg["thresholds"] = {{"low", c_low}, {"high", c_high}};
            cfg["bound_c"] = c_bound;
            ordered_json rep;
            rep["frame"] = frame_json(f);
            rep["boundary_point"] = {{"position", bp.position},
                                     {"time", bp.time},
                                     {"kind", biane::boundary_kind_name(bp.kind)}};
            rep["assumption2"] = {{"pass", a2.pass}, {"fifth_moment", a2.fifth_moment}};
            Sink sink(g.out, "classify", cfg);
            sink.os() << rep.dump(2) << "\n";
            if (!a2.pass) std::cerr << "warning: assumption 2 fails at x* (reported, not fatal)\n";
        } else if (*density) {
            auto mu = measure::EmpiricalMeasure::load(d_measure);
            cfg["measure"] = d_measure;
            cfg["t"] = d_t;
            cfg["nodes"] = d_nodes;
            auto prof = biane::density_on_support(mu, d_t, d_nodes);
            Sink sink(g.out, "density", cfg);
            for (const auto& iv : biane::support(mu, d_t))
                sink.os() << "# support: " << iv.lo << " " << iv.hi << "\n";
            sink.os() << "# mass: " << biane::profile_mass(prof) << "\n";
            sink.os() << "x,density\n";
            for (const auto& s : prof.samples) sink.os() << s.x_tilde << "," << s.psi << "\n";
        } else if (*kernel) {
            cfg["family"] = k_family;
            cfg["tau1"] = k_tau1;
            cfg["tau2"] = k_tau2;
            cfg["u"] = {k_umin, k_umax, k_usteps};
            cfg["v"] = {k_vmin, k_vmax, k_vsteps};
            auto us = linspace(k_umin, k_umax, k_usteps), vs = linspace(k_vmin, k_vmax, k_vsteps);
            kernels::KernelOptions opt;
            opt.tol = g.tol;
            std::function<kernels::KernelValue(double, double)> eval;
            measure::EmpiricalMeasure mu = load_or(k_measure, two_atom());
            measure::ScalingFrame frame{};
            finite_n::PlanStyle style = finite_n::PlanStyle::Generic;
            if (k_family == "airy") {
                eval = [&](double u, double v) { return kernels::airy_ext({k_tau1, k_tau2, u, v}, opt); };
            } else if (k_family == "pearcey") {
                eval = [&](double u, double v) { return kernels::pearcey_ext({k_tau1, k_tau2, u, v}, opt); };
            } else if (k_family == "transition") {
                cfg["a"] = k_a;
                eval = [&](double u, double v) {
                    return kernels::transition(k_a, {k_tau1, k_tau2, u, v}, opt);
                };
            } else {
                cfg["measure"] = k_measure.empty() ? "builtin:two_atom" : k_measure;
                cfg["xstar"] = k_xstar;
                cfg["n"] = k_n;
                cfg["branch"] = k_branch;
                cfg["plan"] = k_plan;
                frame = measure::scaling_frame(mu, k_xstar, k_n);
                style = plan_from_flag(k_plan);
                eval = [&](double u, double v) {
                    finite_n::RescaledRequest rq{
                        frame, k_branch == "E" ? measure::TimeBranch::E : measure::TimeBranch::M,
                        k_tau1, k_tau2, u, v};
                    return finite_n::rescaled_kernel(mu, rq, style, {}, g.tol);
                };
            }
            Sink sink(g.out, "kernel", cfg);
            sink.os() << "tau1,tau2,u,v,re,im,err\n";
            for (double u : us)
                for (double v : vs) {
                    auto k = eval(u, v);
                    sink.os() << k_tau1 << "," << k_tau2 << "," << u << "," << v << ","
                              << k.value.real() << "," << k.value.imag() << "," << k.err << "\n";
                }
        } else if (*converge) {
            auto ns = parse_list<int>(v_nseq);
            for (std::size_t i = 1; i < ns.size(); ++i)
                if (ns[i] <= ns[i - 1]) throw DomainError("--n-seq must be strictly increasing");
            finite_n::Universality target = v_regime == "E"   ? finite_n::Universality::Airy
                                            : v_regime == "M" ? finite_n::Universality::Pearcey
                                                              : finite_n::Universality::Transition;
            auto mu = load_or(v_measure, v_regime == "E" ? delta0() : two_atom());
            std::string plan = v_plan.empty() ? (v_regime == "E" ? "airy-fast" : "merging") : v_plan;
            finite_n::PlanParams pp;
            pp.gamma = v_gamma;
            pp.epsilon = v_eps;
            auto grid = linspace(-v_range, v_range, v_steps);
            cfg["regime"] = v_regime;
            cfg["measure"] = v_measure.empty() ? (v_regime == "E" ? "builtin:delta0" : "builtin:two_atom")
                                               : v_measure;
            cfg["n_seq"] = ns;
            cfg["range"] = v_range;
            cfg["steps"] = v_steps;
            cfg["tau"] = v_tau;
            cfg["plan"] = plan;
            cfg["gamma"] = v_gamma;
            cfg["epsilon"] = v_eps;
            if (v_regime == "T") cfg["index"] = v_index;
            else cfg["xstar"] = std::isnan(v_xstar) ? (v_regime == "E" ? 1.0 : 0.0) : v_xstar;
            Sink sink(g.out, "converge", cfg);
            sink.os() << "n,x_star,I_n,a_phase,sup_error\n";
            double prev = std::numeric_limits<double>::infinity();
            bool decreasing = true;
            for (int n : ns) {
                double xs;
                if (v_regime == "T") {
                    // left of the merging point of the (default) symmetric measure
                    double lo = mu.min_position() + 1e-3 * (0.0 - mu.min_position());
                    xs = measure::point_with_index(mu, n, v_index, lo, -1e-12);
                } else {
                    xs = cfg["xstar"].get<double>();
                }
                auto row = finite_n::sup_error(mu, xs, n, target, grid, grid, v_tau,
                                               plan_from_flag(plan), pp, g.tol);
                sink.os() << n << "," << xs << "," << row.index_I << "," << row.a_phase << ","
                          << row.sup_error << "\n";
                decreasing = decreasing && row.sup_error < prev;
                prev = row.sup_error;
            }
            sink.os() << "# strictly_decreasing: " << (decreasing ? "yes" : "no") << "\n";
        } else if (*tw) {
            if (!(t_step > 0.0) || !(t_max >= t_min)) throw DomainError("bad s-grid");
            cfg["s"] = {t_min, t_max, t_step};
            cfg["order"] = t_order;
            cfg["cutoff"] = t_cut;
            Sink sink(g.out, "tw", cfg);
            sink.os() << "s,F2\n";
            int count = static_cast<int>(std::floor((t_max - t_min) / t_step + 1e-9)) + 1;
            for (int i = 0; i < count; ++i) {
                double s = t_min + i * t_step;
                sink.os() << s << "," << fredholm::tracy_widom_cdf(s, t_order, t_cut) << "\n";
            }
        } else if (*simulate) {
            auto mu = load_or(s_measure, delta0());
            auto method = s_method == "sde" ? sim::Method::SDE : sim::Method::Matrix;
            auto sc = sim::SimConfig::from_measure(mu, s_n, parse_list<double>(s_times), method,
                                                   g.seed, s_dt);
            cfg["measure"] = s_measure.empty() ? "builtin:delta0" : s_measure;
            cfg["n"] = s_n;
            cfg["times"] = sc.t_grid;
            cfg["replicas"] = s_reps;
            cfg["method"] = s_method;
            cfg["dt"] = s_dt;
            auto ens = sim::simulate(sc, s_reps);
            Sink sink(g.out, "simulate", cfg);
            sink.os() << "replica,time,index,lambda\n";
            for (std::size_t r = 0; r < ens.replicas; ++r)
                for (std::size_t ti = 0; ti < ens.times.size(); ++ti)
                    for (int i = 0; i < ens.n; ++i)
                        sink.os() << r << "," << ens.times[ti] << "," << i << "," << ens.at(r, ti, i)
                                  << "\n";
            if (!s_summary.empty()) {
                ordered_json sum;
                sum["header"] = kHeader;
                sum["config"] = cfg;
                sum["replica_seeds"] = "splitmix64(seed, replica)";
                sum["rejected_steps"] = ens.diag.rejected_steps;
                sum["total_steps"] = ens.diag.total_steps;
                sum["bootstrap_time"] = ens.diag.bootstrap_time;
                sum["max_trace_defect"] = ens.diag.max_trace_defect;
                sum["max_jacobi_sweeps"] = ens.diag.max_sweeps;
                std::ofstream f(s_summary);
                if (!f) throw DomainError("cannot open summary file " + s_summary);
                f << sum.dump(2) << "\n";
            }
        } else if (*conn) {
            auto as = parse_list<double>(n_alist);
            auto grid = linspace(-n_range, n_range, n_steps);
            cfg["a_list"] = as;
            cfg["grid"] = {-n_range, n_range, n_steps};
            kernels::KernelOptions opt;
            opt.tol = g.tol;
            Sink sink(g.out, "conn", cfg);
            sink.os() << "a,tau,u,v,transition,rhs,abs_diff\n";
            double worst = 0.0;
            for (double a : as)
                for (double tau : grid)
                    for (double u : grid)
                        for (double v : grid) {
                            kernels::KernelPoint p{tau, tau, u, v};
                            auto l = kernels::transition(a, p, opt);
                            auto r = kernels::conn_rhs(a, p, opt);
                            double d = std::abs(l.value - r.value);
                            worst = std::max(worst, d);
                            sink.os() << a << "," << tau << "," << u << "," << v << ","
                                      << l.value.real() << "," << r.value.real() << "," << d << "\n";
                        }
            sink.os() << "# max_violation: " << worst << "\n";
            std::cout << "max identity violation: " << std::scientific << worst << "\n";
            if (worst > 1e-8) {
                std::cerr << "identity violated beyond 1e-8\n";
                return 3;
            }
        }
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << " (estimate " << e.estimate() << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
