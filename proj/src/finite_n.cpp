#include "nibm/finite_n.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "nibm/biane.hpp"
#include "nibm/errors.hpp"

namespace nibm::finite_n {

namespace {

using quad::Contour;


// log(1 + e) - e + e^2/2
cplx log1p_tail(cplx e) {
    if (std::abs(e) < 0.05) {
        cplx p = e * e * e, s = 0.0;
        for (int k = 3; k < 24; ++k) {
            s += (k % 2 ? 1.0 : -1.0) * p / double(k);
            p *= e;
        }
        return s;
    }
    return std::log(1.0 + e) - e + 0.5 * e * e;
}

double stieltjes_at(const EmpiricalMeasure& mu, double r) {
    CompensatedSum<double> s;
    for (const auto& a : mu.atoms()) s.add(a.w / (r - a.x));
    return s.value();
}

// Phase of the z-integrand expanded around r, with y = r + t G0(r) + yp:
// n(z - y)^2/(2t) + n g(z) minus terms independent of z that the gauge absorbs.
class LocalPhase {
public:
    LocalPhase(int n, const EmpiricalMeasure& mu, double r) : n_(n) {
        auto mult = mu.multiplicities(n);
        CompensatedSum<double> g1;
        for (std::size_t k = 0; k < mu.size(); ++k) {
            double d = r - mu.atoms()[k].x;
            if (d == 0.0) throw DomainError("phase reference coincides with an atom");
            inv_.push_back(1.0 / d);
            m_.push_back(double(mult[k]));
            g1.add(-mu.atoms()[k].w / (d * d));
        }
        g1_ = g1.value();
    }

    cplx operator()(cplx delta, double shift, double t) const {
        double nn = n_;
        cplx v = 0.5 * nn * delta * delta * (1.0 / t + g1_) - nn * delta * shift / t +
                 nn * shift * shift / (2.0 * t);
        for (std::size_t k = 0; k < inv_.size(); ++k) v += m_[k] * log1p_tail(delta * inv_[k]);
        return v;
    }

private:
    int n_;
    double g1_;
    std::vector<double> inv_, m_;
};

struct Core {
    cplx dbl;
    double err;
    double heat;
};

// Kernel gauged with respect to the reference r of the plan; xp, yp are the
// positions relative to r + s G0(r) and r + t G0(r).
Core core_kernel(int n, const EmpiricalMeasure& mu, double s, double t, double xp, double yp,
                 const ContourPlan& plan, double tol) {
    if (!(s > 0.0) || !(t > 0.0)) throw DomainError("times must be positive");
    const double r = plan.reference;
    LocalPhase phase(n, mu, r);
    auto log_a = [&](cplx z) { return phase(z - r, yp, t).real(); };
    Contour sigma = quad::truncate_rays(plan.sigma, log_a, tol);
    Contour gamma = plan.gamma_joined();
    quad::SeparableOptions so;
    so.tol = tol;
    auto res = quad::separable_double(
        sigma, [&](cplx z) { return std::exp(phase(z - r, yp, t)); }, gamma,
        [&](cplx w) { return std::exp(-phase(w - r, xp, s)); }, so);
    double pre = n / (4.0 * kPi * kPi * std::sqrt(s * t));
    Core c{-pre * res.value, pre * res.err_estimate, 0.0};
    if (s > t) {
        double d = xp - yp;
        c.heat = std::sqrt(n / (2.0 * kPi * (s - t))) * std::exp(-n * d * d / (2.0 * (s - t)));
    }
    return c;
}

// exp(f_r(s, x) - f_r(t, y)) in log form for the gauge built from G0 = g0.
double gauge_difference(int n, double g0, double s, double t, double x, double y) {
    return -n * g0 * (x - y) + 0.5 * n * g0 * g0 * (s - t);
}

double local_scale(const ScalingFrame& f, PlanStyle style) {
    double n = f.n;
    if (style == PlanStyle::Merging) return f.c3 * f.t_cr * std::pow(n, -0.25);
    if (!(f.jet.g2 > 0.0)) throw DomainError("Airy plans need G^(2) > 0");
    return f.c2 * f.t_cr * std::cbrt(1.0 / n);
}

// First point (scanning from x* outwards on `side`) where the graph at time s
// meets the circle of radius rho around x*.
double entry_abscissa(const EmpiricalMeasure& mu, double s, double x_star, double rho, int side) {
    auto h = [&](double x) {
        double y = biane::y_function(mu, s, x);
        return (x - x_star) * (x - x_star) + y * y - rho * rho;
    };
    double lo = x_star, hi = x_star + side * rho;
    if (h(lo) >= 0.0)
        throw NumericalError("contour plan: the density graph never enters the disk around x*");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (h(mid) < 0.0 ? lo : hi) = mid;
    }
    return hi;
}

// Graph points x + i y(x) at time s for all support intervals beyond `cut`
// on the given side, ordered by decreasing real part.
std::vector<cplx> side_graph(const EmpiricalMeasure& mu, double s, double cut, int side, int count) {
    std::vector<cplx> pts;
    for (const auto& iv : biane::preimage_support(mu, s)) {
        biane::Interval part = iv;
        if (side > 0) {
            if (iv.hi <= cut) continue;
            part.lo = std::max(iv.lo, cut);
        } else {
            if (iv.lo >= cut) continue;
            part.hi = std::min(iv.hi, cut);
        }
        if (!(part.hi > part.lo)) continue;
        auto g = biane::graph_nodes(mu, s, part, count);
        pts.insert(pts.end(), g.begin(), g.end());
    }
    std::sort(pts.begin(), pts.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
    if (pts.empty()) throw NumericalError("contour plan: no support left to follow on this side");
    return pts;
}

// Closed counter-clockwise loop from an upper path ordered right to left.
Contour close_with_conjugate(const std::vector<cplx>& upper) {
    std::vector<cplx> pts(upper);
    pts.front() = pts.front().real();
    pts.back() = pts.back().real();
    for (std::size_t i = upper.size() - 1; i-- > 1;) pts.push_back(std::conj(upper[i]));
    return Contour::polyline(pts, true);
}

Contour vertical_line(double x0) {
    Contour c;
    c.ray_in(x0, -kPi / 2).ray_out(x0, kPi / 2);
    return c;
}

Contour bent_sigma(double x_star, double radius) {
    cplx zh = x_star + std::polar(radius, 7.0 * kPi / 16.0);
    Contour c;
    c.ray_in(std::conj(zh), -kPi / 2);
    c.segment(std::conj(zh), x_star).segment(x_star, zh);
    c.ray_out(zh, kPi / 2);
    return c;
}

ContourPlan generic_plan(const EmpiricalMeasure& mu, const ScalingFrame& f, double s) {
    const auto& atoms = mu.atoms();
    double xs = f.x_star;
    double x0 = xs;
    if (xs > mu.min_position() && xs < mu.max_position()) {
        for (std::size_t k = 0; k + 1 < atoms.size(); ++k)
            if (atoms[k].x < xs && xs < atoms[k + 1].x) x0 = 0.5 * (atoms[k].x + atoms[k + 1].x);
    }
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& a : atoms) nearest = std::min(nearest, std::abs(a.x - x0));
    double sep = 0.5 * nearest;
    double h = std::min(sep, 1.5 * std::sqrt(2.0 * s / f.n));
    ContourPlan p;
    p.style = PlanStyle::Generic;
    p.reference = x0;
    p.time = s;
    p.separation = sep;
    p.sigma = vertical_line(x0);
    auto rect = [&](double lo, double hi) {
        return Contour::polyline({{lo, -h}, {hi, -h}, {hi, h}, {lo, h}}, true);
    };
    if (mu.min_position() < x0) p.gamma.push_back(rect(mu.min_position() - sep, x0 - sep));
    if (mu.max_position() > x0) p.gamma.push_back(rect(x0 + sep, mu.max_position() + sep));
    return p;
}

}  // namespace

const char* plan_style_name(PlanStyle s) {
    switch (s) {
        case PlanStyle::Generic: return "Generic";
        case PlanStyle::AiryFast: return "AiryFast";
        case PlanStyle::AirySlow: return "AirySlow";
        case PlanStyle::Merging: return "Merging";
    }
    return "?";
}

PlanStyle parse_plan_style(const std::string& name) {
    for (auto s : {PlanStyle::Generic, PlanStyle::AiryFast, PlanStyle::AirySlow, PlanStyle::Merging})
        if (name == plan_style_name(s)) return s;
    throw DomainError("unknown plan style: " + name);
}

Contour ContourPlan::gamma_joined() const {
    Contour c;
    for (const auto& loop : gamma)
        for (const auto& piece : loop.pieces()) c.append(piece);
    return c;
}

std::string ContourPlan::to_json() const {
    using nlohmann::json;
    auto poly = [](const Contour& c) {
        json pts = json::array();
        for (const auto& s : c.segments()) {
            if (pts.empty()) pts.push_back({s.a.real(), s.a.imag()});
            pts.push_back({s.b.real(), s.b.imag()});
        }
        return pts;
    };
    json j;
    j["style"] = plan_style_name(style);
    j["reference"] = reference;
    j["time"] = time;
    j["separation"] = separation;
    if (std::isfinite(r_n)) j["r_n"] = r_n;
    if (std::isfinite(disk_radius)) j["disk_radius"] = disk_radius;
    json anc = json::array();
    for (auto a : anchors) anc.push_back({a.real(), a.imag()});
    j["anchors"] = anc;
    Contour sig;
    for (const auto& piece : sigma.pieces()) {
        if (auto r = std::get_if<quad::Ray>(&piece); r && !std::isfinite(r->length)) {
            quad::Ray t = *r;
            t.length = 1.0;
            sig.append(t);
        } else {
            sig.append(piece);
        }
    }
    j["sigma"] = poly(sig);
    j["gamma"] = json::array();
    for (const auto& loop : gamma) j["gamma"].push_back(poly(loop));
    return j.dump();
}

ContourPlan build_plan(const EmpiricalMeasure& mu, const ScalingFrame& frame, PlanStyle style,
                       const PlanParams& params) {
    if (params.graph_nodes < 2) throw DomainError("graph_nodes must be at least 2");
    if (!(params.epsilon > 0.0 && params.epsilon < 0.25)) throw DomainError("epsilon must lie in (0, 1/4)");
    if (!(params.gamma > 0.0)) throw DomainError("gamma must be positive");
    if (!(params.separation > 0.0)) throw DomainError("separation must be positive");
    if (mu.is_atom(frame.x_star)) throw DomainError("x* coincides with an atom");
    double s = std::isnan(params.time) ? frame.t_cr : params.time;
    if (!(s > 0.0)) throw DomainError("plan time must be positive");
    if (style == PlanStyle::Generic) return generic_plan(mu, frame, s);

    const double xs = frame.x_star;
    const double n = frame.n;
    const int count = params.graph_nodes;
    ContourPlan p;
    p.style = style;
    p.reference = xs;
    p.time = s;
    p.disk_radius = std::pow(n, -0.25 + params.epsilon);
    p.separation = params.separation * local_scale(frame, style);
    p.sigma = bent_sigma(xs, p.disk_radius);
    const double R = p.disk_radius, d = p.separation;
    bool left = mu.min_position() < xs, right = mu.max_position() > xs;

    if (style == PlanStyle::Merging) {
        if (right) {
            double xe = entry_abscissa(mu, s, xs, R, +1);
            auto up = side_graph(mu, s, xe, +1, count);
            p.anchors.push_back(up.back());
            up.push_back(xs + d);
            p.gamma.push_back(close_with_conjugate(up));
        }
        if (left) {
            double xe = entry_abscissa(mu, s, xs, R, -1);
            auto g = side_graph(mu, s, xe, -1, count);
            p.anchors.push_back(g.front());
            std::vector<cplx> up{xs - d};
            up.insert(up.end(), g.begin(), g.end());
            p.gamma.push_back(close_with_conjugate(up));
        }
    } else {
        p.r_n = std::cbrt(1.0 / (n * frame.jet.g2)) * std::pow(n, params.gamma / 6.0);
        const double rn = p.r_n;
        if (!(rn > d)) throw NumericalError("contour plan: r_n does not exceed the vertex offset");
        cplx w_left = xs + std::polar(rn, 2.0 * kPi / 3.0);
        if (style == PlanStyle::AiryFast) {
            if (right) {
                std::vector<cplx> up;
                try {
                    double xe = entry_abscissa(mu, s, xs, rn, +1);
                    up = side_graph(mu, s, xe, +1, count);
                    p.anchors.push_back(up.back());
                    up.push_back(up.back().real());
                } catch (const NumericalError&) {
                    // graph stays outside the small disk: loop around the right bulk alone
                    up = side_graph(mu, s, xs + rn, +1, count);
                }
                p.gamma.push_back(close_with_conjugate(up));
            }
            if (left) {
                auto g = side_graph(mu, s, w_left.real(), -1, count);
                p.anchors.push_back(w_left);
                p.anchors.push_back(g.front());
                std::vector<cplx> up{xs - d, w_left};
                up.insert(up.end(), g.begin(), g.end());
                p.gamma.push_back(close_with_conjugate(up));
            }
        } else {
            if (!(rn < R)) throw NumericalError("contour plan: r_n must be below the disk radius");
            if (right) {
                double xe = entry_abscissa(mu, s, xs, R, +1);
                auto up = side_graph(mu, s, xe, +1, count);
                cplx w1 = up.back();
                cplx w2(w1.real(), (w1.real() - xs) * std::tan(kPi / 7.0));
                cplx w3 = xs + std::polar(rn, kPi / 7.0);
                p.anchors.insert(p.anchors.end(), {w1, w2, w3});
                up.push_back(w2);
                up.push_back(w3);
                up.push_back(w3.real());
                p.gamma.push_back(close_with_conjugate(up));
            }
            if (left) {
                double xe = entry_abscissa(mu, s, xs, R, -1);
                auto g = side_graph(mu, s, xe, -1, count);
                p.anchors.push_back(w_left);
                p.anchors.push_back(g.front());
                std::vector<cplx> up{xs - d, w_left};
                up.insert(up.end(), g.begin(), g.end());
                p.gamma.push_back(close_with_conjugate(up));
            }
        }
    }
    for (const auto& a : mu.atoms()) {
        int wind = 0;
        for (const auto& loop : p.gamma) wind += quad::winding_number(loop, a.x);
        if (wind != 1) throw NumericalError("contour plan: gamma does not wind once around every atom");
    }
    return p;
}

KernelValue raw_kernel(int n, const EmpiricalMeasure& mu, double s, double t, double x, double y,
                       const ContourPlan& plan, double tol) {
    double r = plan.reference;
    double g0 = stieltjes_at(mu, r);
    Core c = core_kernel(n, mu, s, t, x - r - s * g0, y - r - t * g0, plan, tol);
    double f = std::exp(gauge_difference(n, g0, s, t, x, y));
    return {f * (c.dbl - c.heat), f * c.err};
}

KernelValue gauged_kernel(int n, const EmpiricalMeasure& mu, const ScalingFrame& frame, double s,
                          double t, double x, double y, const ContourPlan& plan, double tol) {
    double r = plan.reference;
    double g0 = stieltjes_at(mu, r);
    Core c = core_kernel(n, mu, s, t, x - r - s * g0, y - r - t * g0, plan, tol);
    double f = std::exp(gauge_difference(n, g0, s, t, x, y) -
                        gauge_difference(n, frame.jet.g0, s, t, x, y));
    return {f * (c.dbl - c.heat), f * c.err};
}

KernelValue rescaled_kernel(const EmpiricalMeasure& mu, const RescaledRequest& req, PlanStyle style,
                            const PlanParams& params, double tol) {
    const bool mirror = req.frame.needs_mirror;
    EmpiricalMeasure m = mirror ? mu.mirrored() : mu;
    ScalingFrame f = mirror ? measure::mirrored_frame(req.frame) : req.frame;
    double u = mirror ? -req.u : req.u;
    double v = mirror ? -req.v : req.v;
    double s = measure::time_scaling(f, req.tau1, req.regime);
    double t = measure::time_scaling(f, req.tau2, req.regime);
    double n = f.n;
    double scale = req.regime == TimeBranch::E ? f.c2 * std::pow(n, 2.0 / 3.0)
                                               : f.c3 * std::pow(n, 0.75);
    PlanParams pp = params;
    pp.time = s;
    ContourPlan plan = build_plan(m, f, style, pp);
    double xp = u / scale, yp = v / scale;
    KernelValue k;
    if (plan.reference == f.x_star) {
        Core c = core_kernel(f.n, m, s, t, xp, yp, plan, tol);
        k = {c.dbl - c.heat, c.err};
    } else {
        double x = f.x_star + s * f.jet.g0 + xp, y = f.x_star + t * f.jet.g0 + yp;
        k = gauged_kernel(f.n, m, f, s, t, x, y, plan, tol);
    }
    return {k.value / scale, k.err / scale};
}

double correlation(const std::vector<SpaceTimePoint>& points, const KernelFn& kernel) {
    std::size_t m = points.size();
    if (m == 0) return 1.0;
    for (const auto& p : points)
        if (!(p.time > 0.0)) throw DomainError("correlation times must be positive");
    std::vector<cplx> a(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            a[i * m + j] = kernel(points[i].time, points[i].x, points[j].time, points[j].x);
    return determinant(std::move(a), m).real();
}

const char* universality_name(Universality u) {
    switch (u) {
        case Universality::Airy: return "airy";
        case Universality::Pearcey: return "pearcey";
        case Universality::Transition: return "transition";
    }
    return "?";
}

ConvergenceRow sup_error(const EmpiricalMeasure& mu, double x_star, int n, Universality target,
                         const std::vector<double>& u_grid, const std::vector<double>& v_grid,
                         double tau, PlanStyle style, const PlanParams& params, double tol) {
    if (u_grid.empty() || v_grid.empty()) throw DomainError("convergence grid is empty");
    ScalingFrame f = measure::scaling_frame(mu, x_star, n);
    ConvergenceRow row{n, x_star, f.index_I, f.a_phase, 0.0, {}};
    TimeBranch branch = target == Universality::Airy ? TimeBranch::E : TimeBranch::M;
    for (double u : u_grid)
        for (double v : v_grid) {
            RescaledRequest rq{f, branch, tau, tau, u, v};
            KernelValue k = rescaled_kernel(mu, rq, style, params, tol);
            kernels::KernelPoint p{tau, tau, u, v};
            KernelValue r = target == Universality::Airy      ? kernels::airy_ext(p)
                            : target == Universality::Pearcey ? kernels::pearcey_ext(p)
                                                              : kernels::transition(f.a_phase, p);
            double e = std::abs(k.value - r.value);
            row.sup_error = std::max(row.sup_error, e);
            row.points.push_back({u, v, k.value.real(), r.value.real(), k.err + r.err});
        }
    return row;
}

}  // namespace nibm::finite_n
