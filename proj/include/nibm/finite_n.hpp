#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nibm/kernels.hpp"
#include "nibm/measure.hpp"
#include "nibm/quadrature.hpp"

namespace nibm::finite_n {

using kernels::KernelValue;
using measure::EmpiricalMeasure;
using measure::ScalingFrame;
using measure::TimeBranch;

enum class PlanStyle { Generic, AiryFast, AirySlow, Merging };
const char* plan_style_name(PlanStyle s);
PlanStyle parse_plan_style(const std::string& name);

struct PlanParams {
    double gamma = 0.5;       // fast-Airy radius exponent
    double epsilon = 0.04;    // disk radius n^(-1/4 + epsilon)
    double separation = 0.3;  // vertex offset from x*, in local units
    int graph_nodes = 64;     // y-graph samples per support interval
    double time = std::numeric_limits<double>::quiet_NaN();  // graph time, t_cr if NaN
};

// sigma runs bottom to top; gamma is a set of closed counter-clockwise loops
// that together wind once around every atom and stay off sigma.
struct ContourPlan {
    quad::Contour sigma;
    std::vector<quad::Contour> gamma;
    PlanStyle style = PlanStyle::Generic;
    double reference = 0.0;  // abscissa the phase is expanded around
    double time = 0.0;
    double r_n = std::numeric_limits<double>::quiet_NaN();
    double disk_radius = std::numeric_limits<double>::quiet_NaN();
    double separation = 0.0;  // absolute vertex offset
    std::vector<cplx> anchors;

    quad::Contour gamma_joined() const;
    std::string to_json() const;
};

ContourPlan build_plan(const EmpiricalMeasure& mu, const ScalingFrame& frame, PlanStyle style,
                       const PlanParams& params = {});

// K_n(s, x; t, y) including the heat term.
KernelValue raw_kernel(int n, const EmpiricalMeasure& mu, double s, double t, double x, double y,
                       const ContourPlan& plan, double tol = 1e-12);
// raw_kernel times exp(f_n(t, y) - f_n(s, x)) with the gauge of `frame`.
KernelValue gauged_kernel(int n, const EmpiricalMeasure& mu, const ScalingFrame& frame, double s,
                          double t, double x, double y, const ContourPlan& plan,
                          double tol = 1e-12);

struct RescaledRequest {
    ScalingFrame frame;
    TimeBranch regime = TimeBranch::M;
    double tau1 = 0.0, tau2 = 0.0, u = 0.0, v = 0.0;
};

// The left-hand sides of the three convergence statements: the gauged kernel at
// scaled times and positions divided by c n^p. Frames with G^(2) < 0 are
// evaluated on the reflected problem at (-u, -v).
KernelValue rescaled_kernel(const EmpiricalMeasure& mu, const RescaledRequest& req, PlanStyle style,
                            const PlanParams& params = {}, double tol = 1e-12);

enum class Universality { Airy, Pearcey, Transition };
const char* universality_name(Universality u);

struct ConvergencePoint {
    double u, v, value, reference, err;
};
struct ConvergenceRow {
    int n;
    double x_star;
    double index_I;
    double a_phase;
    double sup_error;
    std::vector<ConvergencePoint> points;
};

// sup over the (u, v) grid at tau1 = tau2 = tau of |rescaled kernel - limit|.
// Airy uses the E branch against airy_ext, Pearcey the M branch against
// pearcey_ext, Transition the M branch against transition(a_phase).
ConvergenceRow sup_error(const EmpiricalMeasure& mu, double x_star, int n, Universality target,
                         const std::vector<double>& u_grid, const std::vector<double>& v_grid,
                         double tau, PlanStyle style, const PlanParams& params = {},
                         double tol = 1e-12);

using KernelFn = std::function<cplx(double s, double x, double t, double y)>;
struct SpaceTimePoint {
    double time;
    double x;
};
// det [K(t_i, x_i; t_j, x_j)].
double correlation(const std::vector<SpaceTimePoint>& points, const KernelFn& kernel);

}  // namespace nibm::finite_n
