#pragma once

#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "nibm/util.hpp"

namespace nibm::quad {

struct Segment {
    cplx a;
    cplx b;
};

// Half-line origin + r*direction, r in [0, length]. An inward ray is traversed
// from its far end towards the origin. Length is +inf until truncated.
struct Ray {
    cplx origin;
    cplx direction;
    double length = std::numeric_limits<double>::infinity();
    bool inward = false;
};

using Piece = std::variant<Segment, Ray>;

cplx piece_start(const Piece& p);
cplx piece_end(const Piece& p);

class Contour {
public:
    Contour() = default;

    Contour& segment(cplx a, cplx b);
    // Ray leaving `origin` in direction exp(i*angle).
    Contour& ray_out(cplx origin, double angle);
    // Ray arriving at `origin` from infinity along exp(i*angle).
    Contour& ray_in(cplx origin, double angle);
    Contour& append(const Piece& p);

    static Contour polyline(const std::vector<cplx>& points, bool close = false);

    const std::vector<Piece>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }
    bool is_finite() const;
    double length() const;
    cplx start() const;
    cplx end() const;
    bool is_closed(double tol = 1e-12) const;
    Contour reversed() const;
    // Throws unless consecutive pieces meet within tol and directions are unit.
    void validate(double tol = 1e-12) const;
    // Every piece as a finite oriented segment (rays must be truncated).
    std::vector<Segment> segments() const;

private:
    std::vector<Piece> pieces_;
};

// Winding number of a closed finite contour around p.
int winding_number(const Contour& closed, cplx p);
// Distance between two finite contours.
double distance(const Contour& a, const Contour& b);

struct QuadResult {
    cplx value{};
    double err_estimate = 0.0;
    int panels_used = 0;
};

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};
// Gauss-Legendre rule of order m (cached).
const GaussRule& gauss_legendre(int m);

using Fn1 = std::function<cplx(cplx)>;
using Fn2 = std::function<cplx(cplx, cplx)>;

// Adaptive GL16 panel bisection until the summed refinement differences drop
// below tol (absolute). Throws NumericalError with the best value on budget
// exhaustion.
QuadResult integrate(const Fn1& f, const Contour& c, double tol, int max_panels = 1 << 15);

// Tensor-product GL16 panels with joint refinement where panels of cz and cw
// come within 10 panel lengths, then uniform bisection until two successive
// results differ by less than tol.
QuadResult integrate_double(const Fn2& f, const Contour& cz, const Contour& cw, double tol,
                            long max_pairs = 1L << 16);

// Smallest sampled r with phase_decay(r) < log(tol) - 10 (the next sample
// must also be below). Throws if not reached by r = 1e4.
double truncate_ray(const std::function<double(double)>& phase_decay, double tol);

// Truncates every infinite ray of c where log|f| has fallen log(tol) - 10
// below the largest value of log|f| seen on the contour.
Contour truncate_rays(const Contour& c, const std::function<double(cplx)>& log_abs, double tol);

struct SeparableOptions {
    double tol = 1e-12;         // relative to the integral of |A| and |B|
    double pole_ratio = 0.5;    // panel length <= pole_ratio * distance to the other contour
    int max_depth = 40;
    int max_panels = 1 << 14;
};

// Integral of A(z) B(w) / (z - w) over finite, disjoint contours cz x cw.
// Each contour is discretised adaptively for its own factor and refined near
// the other contour; the error estimate compares against the fully bisected
// discretisation (whose value is returned) plus a rounding term.
QuadResult separable_double(const Contour& cz, const Fn1& A, const Contour& cw, const Fn1& B,
                            const SeparableOptions& opt = {});

}  // namespace nibm::quad
