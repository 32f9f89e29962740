#pragma once

#include <utility>

#include "nibm/quadrature.hpp"

namespace nibm::kernels {

struct KernelPoint {
    double tau1 = 0.0;
    double tau2 = 0.0;
    double u = 0.0;
    double v = 0.0;
};

enum class HeatConvention { Quarter, Half };

struct KernelValue {
    cplx value{};
    double err = 0.0;
    double real() const { return value.real(); }
};

struct KernelOptions {
    double tol = 1e-12;           // relative quadrature tolerance
    double vertex = 0.5;          // distance of the contour vertices from the origin
    double pearcey_angle = kPi / 4;  // opening of the omega rays of the Pearcey contour
};

double heat_term(const KernelPoint& p, HeatConvention convention);

KernelValue airy_ext(const KernelPoint& p, const KernelOptions& opt = {});
KernelValue pearcey_ext(const KernelPoint& p, const KernelOptions& opt = {});
// Integrated over rays at +-7pi/16 (zeta) and wedges at pi/7, 3pi/4 (omega),
// a different route from pearcey_ext; for a > 1 the variables are rescaled
// by a^(-1/3) first.
KernelValue transition(double a, const KernelPoint& p, const KernelOptions& opt = {});
// a^(1/3) K^a(2a^(2/3) tau1, 2a^(2/3) tau2, a^(1/3) u, a^(1/3) v), evaluated in
// the rescaled variables where the quartic coefficient is a^(-4/3).
KernelValue transition_rescaled(double a, const KernelPoint& p, const KernelOptions& opt = {});
KernelValue conn_rhs(double a, const KernelPoint& p, const KernelOptions& opt = {});

struct AiryPair {
    double ai;
    double ai_prime;
};
// Maclaurin series for |x| <= 4, own contour integral otherwise; |x| <= 15.
AiryPair airy_function(double x);
AiryPair airy_series(double x);
AiryPair airy_contour(double x);

// Static Airy kernel (Ai(x)Ai'(y) - Ai'(x)Ai(y))/(x - y) from library Airy functions.
double static_airy_kernel(double x, double y);
// Extended Airy kernel through its integral representation over lambda >= 0
// of shifted Airy products (independent of the contour route).
double airy_ext_lambda(const KernelPoint& p);

}  // namespace nibm::kernels
