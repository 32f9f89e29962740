#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nibm/biane.hpp"
#include "nibm/errors.hpp"
#include "nibm/finite_n.hpp"
#include "nibm/fredholm.hpp"
#include "nibm/kernels.hpp"
#include "nibm/measure.hpp"
#include "nibm/sim.hpp"

namespace py = pybind11;
using namespace nibm;

namespace {

measure::EmpiricalMeasure make_measure(const std::vector<std::pair<double, double>>& atoms) {
    std::vector<measure::Atom> a;
    for (auto [x, w] : atoms) a.push_back({x, w});
    return measure::EmpiricalMeasure(a);
}

py::dict frame_dict(const measure::ScalingFrame& f) {
    py::dict d;
    d["x_star"] = f.x_star;
    d["n"] = f.n;
    d["jet"] = py::make_tuple(f.jet.g0, f.jet.g1, f.jet.g2, f.jet.g3);
    d["t_cr"] = f.t_cr;
    d["I_n"] = f.index_I;
    d["c2"] = f.c2;
    d["c3"] = f.c3;
    d["a_n"] = f.a;
    d["a_phase"] = f.a_phase;
    d["regime"] = measure::regime_name(f.regime);
    d["needs_mirror"] = f.needs_mirror;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kernels, gap probabilities and simulations for non-intersecting Brownian motions";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<measure::EmpiricalMeasure>(m, "Measure")
        .def(py::init(&make_measure), py::arg("atoms"), "List of (position, weight) pairs.")
        .def_static("from_points", &measure::EmpiricalMeasure::from_points)
        .def_static("load", &measure::EmpiricalMeasure::load)
        .def_property_readonly("atoms",
                               [](const measure::EmpiricalMeasure& mu) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const auto& a : mu.atoms()) out.emplace_back(a.x, a.w);
                                   return out;
                               })
        .def("mirrored", &measure::EmpiricalMeasure::mirrored)
        .def("to_json", &measure::EmpiricalMeasure::to_json)
        .def("__len__", &measure::EmpiricalMeasure::size);

    m.def("stieltjes", &measure::stieltjes, py::arg("mu"), py::arg("z"));
    m.def("jet_at", [](const measure::EmpiricalMeasure& mu, double x) {
        auto j = measure::jet_at(mu, x);
        return py::make_tuple(j.g0, j.g1, j.g2, j.g3);
    });
    m.def("critical_time", &measure::critical_time);
    m.def("scaling_frame",
          [](const measure::EmpiricalMeasure& mu, double x, int n, double low, double high) {
              return frame_dict(measure::scaling_frame(mu, x, n, {low, high}));
          },
          py::arg("mu"), py::arg("x_star"), py::arg("n"), py::arg("low") = 0.2, py::arg("high") = 5.0);

    m.def("y_function", &biane::y_function);
    m.def("forward_map", &biane::forward_map);
    m.def("support", [](const measure::EmpiricalMeasure& mu, double t) {
        std::vector<std::pair<double, double>> out;
        for (const auto& iv : biane::support(mu, t)) out.emplace_back(iv.lo, iv.hi);
        return out;
    });
    m.def("density_on_support",
          [](const measure::EmpiricalMeasure& mu, double t, int per_interval) {
              auto p = biane::density_on_support(mu, t, per_interval);
              py::array_t<double> x(p.samples.size()), psi(p.samples.size());
              auto xm = x.mutable_unchecked<1>();
              auto pm = psi.mutable_unchecked<1>();
              for (std::size_t i = 0; i < p.samples.size(); ++i) {
                  xm(i) = p.samples[i].x_tilde;
                  pm(i) = p.samples[i].psi;
              }
              return py::make_tuple(x, psi);
          },
          py::arg("mu"), py::arg("t"), py::arg("per_interval") = 200);
    m.def("merging_initial_point", [](const measure::EmpiricalMeasure& mu, double lo, double hi) {
        return biane::merging_initial_point(mu, {lo, hi});
    });

    auto point = [](double t1, double t2, double u, double v) { return kernels::KernelPoint{t1, t2, u, v}; };
    m.def("airy_ext", [=](double t1, double t2, double u, double v) {
        return kernels::airy_ext(point(t1, t2, u, v)).value;
    });
    m.def("pearcey_ext", [=](double t1, double t2, double u, double v) {
        return kernels::pearcey_ext(point(t1, t2, u, v)).value;
    });
    m.def("transition", [=](double a, double t1, double t2, double u, double v) {
        return kernels::transition(a, point(t1, t2, u, v)).value;
    });
    m.def("conn_rhs", [=](double a, double t1, double t2, double u, double v) {
        return kernels::conn_rhs(a, point(t1, t2, u, v)).value;
    });
    m.def("airy", [](double x) {
        auto a = kernels::airy_function(x);
        return py::make_tuple(a.ai, a.ai_prime);
    });

    m.def("rescaled_kernel",
          [](const measure::EmpiricalMeasure& mu, double x_star, int n, const std::string& branch,
             double t1, double t2, double u, double v, const std::string& plan) {
              finite_n::RescaledRequest rq{measure::scaling_frame(mu, x_star, n),
                                           branch == "E" ? measure::TimeBranch::E : measure::TimeBranch::M,
                                           t1, t2, u, v};
              return finite_n::rescaled_kernel(mu, rq, finite_n::parse_plan_style(plan)).value;
          },
          py::arg("mu"), py::arg("x_star"), py::arg("n"), py::arg("branch"), py::arg("tau1"),
          py::arg("tau2"), py::arg("u"), py::arg("v"), py::arg("plan") = "Generic");

    m.def("tracy_widom_cdf", &fredholm::tracy_widom_cdf, py::arg("s"), py::arg("quad_order") = 48,
          py::arg("cutoff") = 14.0);
    m.def("gap_probability",
          [](const std::vector<std::pair<double, double>>& slices, int quad_order, double cutoff) {
              fredholm::GapSpec spec;
              for (auto [tau, a] : slices) spec.slices.push_back({tau, a});
              spec.quad_order = quad_order;
              spec.cutoff = cutoff;
              return fredholm::fredholm_det(spec);
          },
          py::arg("slices"), py::arg("quad_order") = 48, py::arg("cutoff") = 14.0);

    m.def("simulate",
          [](const measure::EmpiricalMeasure& mu, int n, std::vector<double> times, std::size_t replicas,
             std::uint64_t seed, const std::string& method, double dt) {
              auto cfg = sim::SimConfig::from_measure(mu, n, std::move(times),
                                                      method == "sde" ? sim::Method::SDE : sim::Method::Matrix,
                                                      seed, dt);
              sim::PathEnsemble ens;
              {
                  py::gil_scoped_release release;
                  ens = sim::simulate(cfg, replicas);
              }
              py::array_t<double> out({ens.replicas, ens.times.size(), static_cast<std::size_t>(ens.n)});
              std::copy(ens.values.begin(), ens.values.end(), out.mutable_data());
              return out;
          },
          py::arg("mu"), py::arg("n"), py::arg("times"), py::arg("replicas"), py::arg("seed") = 1,
          py::arg("method") = "matrix", py::arg("dt") = 1e-3);
}
