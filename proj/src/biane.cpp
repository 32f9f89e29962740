#include "nibm/biane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nibm/errors.hpp"

namespace nibm::biane {

namespace {

double check_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time must be positive");
    return t;
}

// Sum of w/((x-s)^2 + y^2).
double level(const EmpiricalMeasure& mu, double x, double y) {
    CompensatedSum<double> s;
    double y2 = y * y;
    for (const auto& a : mu.atoms()) {
        double d = x - a.x;
        s.add(a.w / (d * d + y2));
    }
    return s.value();
}

// Sum of w/(x-s)^3, strictly decreasing between consecutive atoms.
double cubic_moment(const EmpiricalMeasure& mu, double x) {
    CompensatedSum<double> s;
    for (const auto& a : mu.atoms()) {
        double d = x - a.x;
        s.add(a.w / (d * d * d));
    }
    return s.value();
}

// Bisection for a sign change of f on [lo, hi] (f(lo) and f(hi) of opposite
// sign or infinite), down to adjacent doubles.
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

const char* boundary_kind_name(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::UpperEdge: return "UpperEdge";
        case BoundaryKind::LowerEdge: return "LowerEdge";
        case BoundaryKind::Merging: return "Merging";
    }
    return "?";
}

double y_function(const EmpiricalMeasure& mu, double t, double x) {
    check_time(t);
    double inv_t = 1.0 / t;
    if (!mu.is_atom(x) && level(mu, x, 0.0) <= inv_t) return 0.0;
    double lo = 0.0, hi = std::sqrt(t);
    while (hi - lo > 1e-12 * hi) {
        double mid = 0.5 * (lo + hi);
        if (level(mu, x, mid) > inv_t)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double forward_map(const EmpiricalMeasure& mu, double t, double x) {
    double y = y_function(mu, t, x);
    CompensatedSum<double> s;
    double y2 = y * y;
    for (const auto& a : mu.atoms()) {
        double d = x - a.x;
        s.add(a.w * d / (d * d + y2));
    }
    return x + t * s.value();
}

DensityProfile density(const EmpiricalMeasure& mu, double t, const std::vector<double>& x_grid) {
    check_time(t);
    for (std::size_t i = 1; i < x_grid.size(); ++i)
        if (!(x_grid[i] > x_grid[i - 1])) throw DomainError("x grid must be strictly increasing");
    DensityProfile p{t, {}};
    p.samples.reserve(x_grid.size());
    for (double x : x_grid)
        p.samples.push_back({forward_map(mu, t, x), y_function(mu, t, x) / (kPi * t)});
    return p;
}

std::vector<Interval> preimage_support(const EmpiricalMeasure& mu, double t) {
    check_time(t);
    const auto& atoms = mu.atoms();
    double inv_t = 1.0 / t;
    double root_t = std::sqrt(t);
    // h(x) = sum w/(x-s)^2 - 1/t is convex between atoms and positive near them.
    auto h = [&](double x) { return level(mu, x, 0.0) - inv_t; };

    std::vector<Interval> out;
    double s_first = atoms.front().x;
    double start = bisect(h, s_first - root_t, s_first);
    for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
        double sl = atoms[k].x, sr = atoms[k + 1].x;
        double m = bisect([&](double x) { return cubic_moment(mu, x); }, sl, sr);
        if (h(m) > 0.0) continue;
        out.push_back({start, bisect(h, sl, m)});
        start = bisect(h, m, sr);
    }
    double s_last = atoms.back().x;
    out.push_back({start, bisect(h, s_last, s_last + root_t)});
    return out;
}

std::vector<Interval> support(const EmpiricalMeasure& mu, double t) {
    auto pre = preimage_support(mu, t);
    std::vector<Interval> out;
    out.reserve(pre.size());
    for (const auto& iv : pre) out.push_back({forward_map(mu, t, iv.lo), forward_map(mu, t, iv.hi)});
    return out;
}

std::vector<cplx> graph_nodes(const EmpiricalMeasure& mu, double t, Interval iv, int count) {
    if (count < 2) throw DomainError("graph needs at least two nodes");
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(count));
    double mid = 0.5 * (iv.lo + iv.hi), half = 0.5 * (iv.hi - iv.lo);
    for (int j = 0; j < count; ++j) {
        double x = mid - half * std::cos(kPi * j / (count - 1));
        if (j == 0) x = iv.lo;
        if (j == count - 1) x = iv.hi;
        out.emplace_back(x, y_function(mu, t, x));
    }
    return out;
}

DensityProfile density_on_support(const EmpiricalMeasure& mu, double t, int per_interval) {
    DensityProfile p{t, {}};
    for (const auto& iv : preimage_support(mu, t))
        for (const auto& node : graph_nodes(mu, t, iv, per_interval)) {
            double x = node.real();
            CompensatedSum<double> s;
            double y2 = node.imag() * node.imag();
            for (const auto& a : mu.atoms()) {
                double d = x - a.x;
                s.add(a.w * d / (d * d + y2));
            }
            p.samples.push_back({x + t * s.value(), node.imag() / (kPi * t)});
        }
    return p;
}

double profile_mass(const DensityProfile& profile) {
    CompensatedSum<double> s;
    const auto& v = profile.samples;
    for (std::size_t i = 1; i < v.size(); ++i)
        s.add(0.5 * (v[i].psi + v[i - 1].psi) * (v[i].x_tilde - v[i - 1].x_tilde));
    return s.value();
}

double merging_initial_point(const EmpiricalMeasure& mu, Interval gap) {
    if (!(gap.lo < gap.hi)) throw DomainError("gap must satisfy lo < hi");
    const auto& atoms = mu.atoms();
    double sl = -std::numeric_limits<double>::infinity();
    double sr = std::numeric_limits<double>::infinity();
    for (const auto& a : atoms) {
        if (a.x <= gap.lo) sl = std::max(sl, a.x);
        if (a.x >= gap.hi) sr = std::min(sr, a.x);
        if (a.x > gap.lo && a.x < gap.hi) throw DomainError("gap contains an atom");
    }
    if (!std::isfinite(sl) || !std::isfinite(sr))
        throw DomainError("gap is not bounded by atoms on both sides; no merging point");
    double margin = 1e-12 * (sr - sl);
    double lo = std::max(gap.lo, sl + margin);
    double hi = std::min(gap.hi, sr - margin);
    auto f = [&](double x) { return cubic_moment(mu, x); };
    if (!(f(lo) > 0.0 && f(hi) < 0.0)) throw DomainError("no merging point inside the gap");
    return bisect(f, lo, hi);
}

BoundaryPoint boundary_point(const EmpiricalMeasure& mu, double x_star) {
    auto jet = measure::jet_at(mu, x_star);
    double t_cr = -1.0 / jet.g1;
    BoundaryKind kind;
    if (std::abs(jet.g2) < 1e-10 * std::pow(-jet.g3, 0.75))
        kind = BoundaryKind::Merging;
    else
        kind = jet.g2 > 0.0 ? BoundaryKind::UpperEdge : BoundaryKind::LowerEdge;
    return {x_star, x_star + t_cr * jet.g0, t_cr, kind};
}

}  // namespace nibm::biane
