#include "nibm/kernels.hpp"

#include <boost/math/special_functions/airy.hpp>
#include <cmath>

#include "nibm/errors.hpp"

namespace nibm::kernels {

namespace {

using quad::Contour;

// exp(-q z^4/4 + b z^3/3 - k2 z^2/2 - k1 z)
struct Quartic {
    double q, b, k2, k1;
    cplx operator()(cplx z) const {
        cplx z2 = z * z;
        return -q * z2 * z2 / 4.0 + b * z2 * z / 3.0 - k2 * z2 / 2.0 - k1 * z;
    }
};

enum class Route { Airy, Pearcey, Transition };

struct Routes {
    Contour sigma;
    Contour gamma;
};

Routes make_routes(Route route, const KernelOptions& opt) {
    const double c = opt.vertex;
    Routes r;
    switch (route) {
        case Route::Airy:
            r.sigma.ray_in(c, -kPi / 3).ray_out(c, kPi / 3);
            r.gamma.ray_in(-c, -2 * kPi / 3).ray_out(-c, 2 * kPi / 3);
            break;
        case Route::Pearcey: {
            double th = opt.pearcey_angle;
            r.sigma.ray_in(0.0, -kPi / 2).ray_out(0.0, kPi / 2);
            r.gamma.ray_in(c, th).ray_out(c, -th);
            r.gamma.ray_in(-c, -(kPi - th)).ray_out(-c, kPi - th);
            break;
        }
        case Route::Transition:
            r.sigma.ray_in(0.0, -7 * kPi / 16).ray_out(0.0, 7 * kPi / 16);
            r.gamma.ray_in(c, kPi / 7).ray_out(c, -kPi / 7);
            r.gamma.ray_in(-c, -3 * kPi / 4).ray_out(-c, 3 * kPi / 4);
            break;
    }
    return r;
}

// prefactor/(2 pi i)^2 * integral of exp(Fz(zeta) - Fw(omega))/(zeta - omega)
KernelValue double_integral(const Quartic& fz, const Quartic& fw, Route route, double prefactor,
                            const KernelOptions& opt) {
    Routes r = make_routes(route, opt);
    Contour sigma = quad::truncate_rays(r.sigma, [&](cplx z) { return fz(z).real(); }, opt.tol);
    Contour gamma = quad::truncate_rays(r.gamma, [&](cplx w) { return -fw(w).real(); }, opt.tol);
    quad::SeparableOptions so;
    so.tol = opt.tol;
    auto res = quad::separable_double(
        sigma, [&](cplx z) { return std::exp(fz(z)); }, gamma,
        [&](cplx w) { return std::exp(-fw(w)); }, so);
    const double scale = prefactor / (4.0 * kPi * kPi);
    return {-scale * res.value, std::abs(scale) * res.err_estimate};
}

KernelValue minus_heat(KernelValue k, const KernelPoint& p, HeatConvention c) {
    k.value -= heat_term(p, c);
    return k;
}

void check_point(const KernelPoint& p) {
    if (!std::isfinite(p.tau1) || !std::isfinite(p.tau2) || !std::isfinite(p.u) || !std::isfinite(p.v))
        throw DomainError("kernel arguments must be finite");
}

constexpr double kAi0 = 0.355028053887817239260;
constexpr double kAip0 = -0.258819403792806798405;

}  // namespace

double heat_term(const KernelPoint& p, HeatConvention convention) {
    double d = p.tau1 - p.tau2;
    if (!(d > 0.0)) return 0.0;
    double k = convention == HeatConvention::Quarter ? 4.0 : 2.0;
    double du = p.u - p.v;
    return std::exp(-du * du / (k * d)) / std::sqrt(k * kPi * d);
}

KernelValue airy_ext(const KernelPoint& p, const KernelOptions& opt) {
    check_point(p);
    Quartic fz{0.0, 1.0, 2.0 * p.tau2, p.v};
    Quartic fw{0.0, 1.0, 2.0 * p.tau1, p.u};
    return minus_heat(double_integral(fz, fw, Route::Airy, 1.0, opt), p, HeatConvention::Quarter);
}

KernelValue pearcey_ext(const KernelPoint& p, const KernelOptions& opt) {
    check_point(p);
    if (!(opt.pearcey_angle > kPi / 8 && opt.pearcey_angle < 3 * kPi / 8))
        throw DomainError("Pearcey ray angle must stay inside the decay sector");
    Quartic fz{1.0, 0.0, p.tau2, p.v};
    Quartic fw{1.0, 0.0, p.tau1, p.u};
    return minus_heat(double_integral(fz, fw, Route::Pearcey, 1.0, opt), p, HeatConvention::Half);
}

KernelValue transition(double a, const KernelPoint& p, const KernelOptions& opt) {
    check_point(p);
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("transition parameter must be >= 0");
    double l = a > 1.0 ? std::cbrt(1.0 / a) : 1.0;
    double l2 = l * l;
    Quartic fz{l2 * l2, a * l2 * l, p.tau2 * l2, p.v * l};
    Quartic fw{l2 * l2, a * l2 * l, p.tau1 * l2, p.u * l};
    return minus_heat(double_integral(fz, fw, Route::Transition, l, opt), p, HeatConvention::Half);
}

KernelValue transition_rescaled(double a, const KernelPoint& p, const KernelOptions& opt) {
    check_point(p);
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("rescaled transition needs a > 0");
    double q = std::pow(a, -4.0 / 3.0);
    Quartic fz{q, 1.0, 2.0 * p.tau2, p.v};
    Quartic fw{q, 1.0, 2.0 * p.tau1, p.u};
    return minus_heat(double_integral(fz, fw, Route::Transition, 1.0, opt), p,
                      HeatConvention::Quarter);
}

KernelValue conn_rhs(double a, const KernelPoint& p, const KernelOptions& opt) {
    check_point(p);
    if (!(a >= 0.0)) throw DomainError("transition parameter must be >= 0");
    double b = a / 3.0, b2 = b * b, b3 = b2 * b;
    KernelPoint shifted{p.tau1 - 3 * b2, p.tau2 - 3 * b2, p.u + b * p.tau1 - 2 * b3,
                        p.v + b * p.tau2 - 2 * b3};
    double factor = std::exp(0.5 * b2 * (p.tau1 - p.tau2) + b * (p.u - p.v));
    KernelValue k = pearcey_ext(shifted, opt);
    return {factor * k.value, factor * k.err};
}

AiryPair airy_series(double x) {
    double x3 = x * x * x;
    // Ai = Ai(0) f - |Ai'(0)| g, with f, g the two Maclaurin solutions
    CompensatedSum<double> f, g, fp, gp;
    double tf = 1.0, tg = x, tfp = x * x / 2.0, tgp = 1.0;
    for (int k = 0; k < 200; ++k) {
        f.add(tf);
        g.add(tg);
        fp.add(tfp);
        gp.add(tgp);
        double kk = 3.0 * k;
        tf *= x3 / ((kk + 2) * (kk + 3));
        tg *= x3 / ((kk + 3) * (kk + 4));
        tfp *= x3 / ((kk + 3) * (kk + 5));
        tgp *= x3 / ((kk + 1) * (kk + 3));
        if (std::abs(tf) + std::abs(tg) + std::abs(tfp) + std::abs(tgp) < 1e-18) break;
    }
    return {kAi0 * f.value() + kAip0 * g.value(), kAi0 * fp.value() + kAip0 * gp.value()};
}

AiryPair airy_contour(double x) {
    if (!(std::abs(x) <= 15.0)) throw DomainError("airy_function is limited to |x| <= 15");
    Contour c;
    double scale;
    if (x > 0.0) {
        double r = std::sqrt(x);
        c.ray_in(r, -kPi / 3).ray_out(r, kPi / 3);
        scale = std::exp(-2.0 / 3.0 * x * r);
    } else {
        double r = std::sqrt(-x);
        cplx lo(0.0, -r), hi(0.0, r);
        c.ray_in(lo, -kPi / 4);
        if (r > 0.0) c.segment(lo, hi);
        c.ray_out(hi, kPi / 4);
        scale = 1.0;
    }
    auto phase = [x](cplx z) { return z * z * z / 3.0 - x * z; };
    const double tol = 1e-14 * scale;
    Contour t = quad::truncate_rays(c, [&](cplx z) { return phase(z).real(); }, 1e-17);
    auto ai = quad::integrate([&](cplx z) { return std::exp(phase(z)); }, t, tol);
    auto aip = quad::integrate([&](cplx z) { return -z * std::exp(phase(z)); }, t, tol);
    const cplx two_pi_i(0.0, 2.0 * kPi);
    return {(ai.value / two_pi_i).real(), (aip.value / two_pi_i).real()};
}

AiryPair airy_function(double x) {
    if (!(std::abs(x) <= 15.0)) throw DomainError("airy_function is limited to |x| <= 15");
    return std::abs(x) <= 4.0 ? airy_series(x) : airy_contour(x);
}

double static_airy_kernel(double x, double y) {
    using boost::math::airy_ai;
    using boost::math::airy_ai_prime;
    if (std::abs(x - y) < 1e-5) {
        double m = 0.5 * (x + y);
        double a = airy_ai(m), ap = airy_ai_prime(m);
        return ap * ap - m * a * a;
    }
    return (airy_ai(x) * airy_ai_prime(y) - airy_ai_prime(x) * airy_ai(y)) / (x - y);
}

double airy_ext_lambda(const KernelPoint& p) {
    check_point(p);
    using boost::math::airy_ai;
    double su = p.u + p.tau1 * p.tau1;
    double sv = p.v + p.tau2 * p.tau2;
    double d = p.tau1 - p.tau2;
    double upper = std::max(8.0, 30.0 - std::min(su, sv));
    const auto& g = quad::gauss_legendre(16);
    CompensatedSum<double> acc;
    for (double lo = 0.0; lo < upper; lo += 1.0) {
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            double l = lo + 0.5 + 0.5 * g.x[k];
            acc.add(0.5 * g.w[k] * std::exp(l * d) * airy_ai(su + l) * airy_ai(sv + l));
        }
    }
    double pre = std::exp(2.0 * (std::pow(p.tau1, 3) - std::pow(p.tau2, 3)) / 3.0 + p.u * p.tau1 -
                          p.v * p.tau2);
    return pre * acc.value() - heat_term(p, HeatConvention::Quarter);
}

}  // namespace nibm::kernels
