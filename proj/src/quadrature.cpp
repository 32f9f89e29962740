#include "nibm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#include "nibm/errors.hpp"

namespace nibm::quad {

namespace {

constexpr double kEps = 2.220446049250313e-16;

cplx unit(double angle) { return std::polar(1.0, angle); }

double point_segment_distance(cplx p, const Segment& s) {
    cplx d = s.b - s.a;
    double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - s.a);
    double u = ((p - s.a) * std::conj(d)).real() / len2;
    u = std::clamp(u, 0.0, 1.0);
    return std::abs(p - (s.a + u * d));
}

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_cross(const Segment& s, const Segment& t) {
    cplx r = s.b - s.a, q = t.b - t.a;
    double den = cross(r, q);
    if (den == 0.0) return false;
    double u = cross(t.a - s.a, q) / den;
    double v = cross(t.a - s.a, r) / den;
    return u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0;
}

double segment_distance(const Segment& s, const Segment& t) {
    if (segments_cross(s, t)) return 0.0;
    return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                     point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

double seg_len(const Segment& s) { return std::abs(s.b - s.a); }

std::pair<Segment, Segment> halves(const Segment& s) {
    cplx m = 0.5 * (s.a + s.b);
    return {{s.a, m}, {m, s.b}};
}

const GaussRule& gl16() {
    static const GaussRule& rule = gauss_legendre(16);
    return rule;
}

cplx panel_sum(const Fn1& f, const Segment& s) {
    const auto& g = gl16();
    cplx half = 0.5 * (s.b - s.a), mid = 0.5 * (s.a + s.b);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) acc += g.w[k] * f(mid + g.x[k] * half);
    return acc * half;
}

double panel_abs_sum(const Fn1& f, const Segment& s) {
    const auto& g = gl16();
    cplx half = 0.5 * (s.b - s.a), mid = 0.5 * (s.a + s.b);
    double acc = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) acc += g.w[k] * std::abs(f(mid + g.x[k] * half));
    return acc * std::abs(half);
}

double min_distance(const Segment& s, const std::vector<Segment>& other) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& t : other) d = std::min(d, segment_distance(s, t));
    return d;
}

}  // namespace

cplx piece_start(const Piece& p) {
    if (auto s = std::get_if<Segment>(&p)) return s->a;
    const auto& r = std::get<Ray>(p);
    return r.inward ? r.origin + r.length * r.direction : r.origin;
}

cplx piece_end(const Piece& p) {
    if (auto s = std::get_if<Segment>(&p)) return s->b;
    const auto& r = std::get<Ray>(p);
    return r.inward ? r.origin : r.origin + r.length * r.direction;
}

Contour& Contour::segment(cplx a, cplx b) { return append(Segment{a, b}); }

Contour& Contour::ray_out(cplx origin, double angle) {
    return append(Ray{origin, unit(angle), std::numeric_limits<double>::infinity(), false});
}

Contour& Contour::ray_in(cplx origin, double angle) {
    return append(Ray{origin, unit(angle), std::numeric_limits<double>::infinity(), true});
}

Contour& Contour::append(const Piece& p) {
    pieces_.push_back(p);
    return *this;
}

Contour Contour::polyline(const std::vector<cplx>& points, bool close) {
    Contour c;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i] != points[i - 1]) c.segment(points[i - 1], points[i]);
    if (close && points.size() > 1 && points.back() != points.front())
        c.segment(points.back(), points.front());
    return c;
}

bool Contour::is_finite() const {
    for (const auto& p : pieces_)
        if (auto r = std::get_if<Ray>(&p); r && !std::isfinite(r->length)) return false;
    return true;
}

double Contour::length() const {
    double total = 0.0;
    for (const auto& p : pieces_) {
        if (auto s = std::get_if<Segment>(&p))
            total += seg_len(*s);
        else
            total += std::get<Ray>(p).length;
    }
    return total;
}

cplx Contour::start() const { return piece_start(pieces_.front()); }
cplx Contour::end() const { return piece_end(pieces_.back()); }

bool Contour::is_closed(double tol) const {
    return !pieces_.empty() && is_finite() && std::abs(start() - end()) <= tol;
}

Contour Contour::reversed() const {
    Contour c;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
        if (auto s = std::get_if<Segment>(&*it)) {
            c.append(Segment{s->b, s->a});
        } else {
            Ray r = std::get<Ray>(*it);
            r.inward = !r.inward;
            c.append(r);
        }
    }
    return c;
}

void Contour::validate(double tol) const {
    for (const auto& p : pieces_)
        if (auto r = std::get_if<Ray>(&p); r && std::abs(std::abs(r->direction) - 1.0) > tol)
            throw DomainError("ray direction is not of unit modulus");
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
        const auto& prev = pieces_[i - 1];
        const auto& cur = pieces_[i];
        bool prev_open = std::holds_alternative<Ray>(prev) && !std::get<Ray>(prev).inward &&
                         !std::isfinite(std::get<Ray>(prev).length);
        bool cur_open = std::holds_alternative<Ray>(cur) && std::get<Ray>(cur).inward &&
                        !std::isfinite(std::get<Ray>(cur).length);
        if (prev_open || cur_open) throw DomainError("contour continues past a point at infinity");
        if (std::abs(piece_end(prev) - piece_start(cur)) > tol)
            throw DomainError("contour pieces do not connect");
    }
}

std::vector<Segment> Contour::segments() const {
    std::vector<Segment> out;
    out.reserve(pieces_.size());
    for (const auto& p : pieces_) {
        if (auto r = std::get_if<Ray>(&p); r && !std::isfinite(r->length))
            throw DomainError("contour has an untruncated ray");
        out.push_back({piece_start(p), piece_end(p)});
    }
    return out;
}

int winding_number(const Contour& closed, cplx p) {
    if (!closed.is_closed(1e-9)) throw DomainError("winding number needs a closed contour");
    double total = 0.0;
    for (const auto& s : closed.segments()) total += std::arg((s.b - p) / (s.a - p));
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

double distance(const Contour& a, const Contour& b) {
    auto sa = a.segments();
    auto sb = b.segments();
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : sa) d = std::min(d, min_distance(s, sb));
    return d;
}

const GaussRule& gauss_legendre(int m) {
    if (m < 1) throw DomainError("Gauss-Legendre order must be positive");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    GaussRule rule;
    rule.x.resize(static_cast<std::size_t>(m));
    rule.w.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) p0 = 1.0;
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= m; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.x[static_cast<std::size_t>(i)] = -x;
        rule.x[static_cast<std::size_t>(m - 1 - i)] = x;
        rule.w[static_cast<std::size_t>(i)] = w;
        rule.w[static_cast<std::size_t>(m - 1 - i)] = w;
    }
    if (m % 2 == 1) rule.x[static_cast<std::size_t>(m / 2)] = 0.0;
    return cache.emplace(m, std::move(rule)).first->second;
}

QuadResult integrate(const Fn1& f, const Contour& c, double tol, int max_panels) {
    struct Panel {
        Segment seg;
        cplx coarse, fine;
        double err;
    };
    auto make = [&](const Segment& s, cplx coarse) {
        auto [l, r] = halves(s);
        cplx fine = panel_sum(f, l) + panel_sum(f, r);
        return Panel{s, coarse, fine, std::abs(fine - coarse)};
    };
    auto cmp = [](const Panel& a, const Panel& b) { return a.err < b.err; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> heap(cmp);
    for (const auto& s : c.segments()) {
        if (seg_len(s) == 0.0) continue;
        for (int k = 0; k < 4; ++k) {
            Segment p{s.a + (s.b - s.a) * (k / 4.0), s.a + (s.b - s.a) * ((k + 1) / 4.0)};
            heap.push(make(p, panel_sum(f, p)));
        }
    }
    auto totals = [&] {
        auto copy = heap;
        CompensatedSum<cplx> value;
        double err = 0.0;
        while (!copy.empty()) {
            value.add(copy.top().fine);
            err += copy.top().err;
            copy.pop();
        }
        return std::pair<cplx, double>{value.value(), err};
    };
    double err = 0.0;
    {
        auto copy = heap;
        while (!copy.empty()) {
            err += copy.top().err;
            copy.pop();
        }
    }
    int iter = 0;
    while (err > tol) {
        if (static_cast<int>(heap.size()) >= max_panels) {
            auto [v, e] = totals();
            throw NumericalError("integrate: panel budget exhausted", v, e);
        }
        Panel worst = heap.top();
        heap.pop();
        auto [l, r] = halves(worst.seg);
        Panel pl = make(l, panel_sum(f, l));
        Panel pr = make(r, panel_sum(f, r));
        err += pl.err + pr.err - worst.err;
        heap.push(pl);
        heap.push(pr);
        if (++iter % 256 == 0) err = totals().second;
    }
    auto [value, e] = totals();
    return {value, e, static_cast<int>(heap.size())};
}

QuadResult integrate_double(const Fn2& f, const Contour& cz, const Contour& cw, double tol,
                            long max_pairs) {
    auto initial = [](const Contour& c) {
        std::vector<Segment> out;
        double cap = c.length() / 8.0;
        for (const auto& s : c.segments()) {
            if (seg_len(s) == 0.0) continue;
            int k = std::max(1, static_cast<int>(std::ceil(seg_len(s) / cap)));
            for (int j = 0; j < k; ++j)
                out.push_back({s.a + (s.b - s.a) * (double(j) / k),
                               s.a + (s.b - s.a) * (double(j + 1) / k)});
        }
        return out;
    };
    auto pz = initial(cz), pw = initial(cw);
    double min_len = std::min(cz.length(), cw.length()) / 64.0;

    // joint refinement where panels approach within 10 panel lengths
    for (int pass = 0; pass < 12; ++pass) {
        std::vector<char> mz(pz.size(), 0), mw(pw.size(), 0);
        bool any = false;
        for (std::size_t i = 0; i < pz.size(); ++i)
            for (std::size_t j = 0; j < pw.size(); ++j) {
                double d = segment_distance(pz[i], pw[j]);
                if (seg_len(pz[i]) > min_len && d < 10.0 * seg_len(pz[i])) mz[i] = any = true;
                if (seg_len(pw[j]) > min_len && d < 10.0 * seg_len(pw[j])) mw[j] = any = true;
            }
        if (!any) break;
        auto split = [](const std::vector<Segment>& v, const std::vector<char>& m) {
            std::vector<Segment> out;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (m[i]) {
                    auto [l, r] = halves(v[i]);
                    out.push_back(l);
                    out.push_back(r);
                } else {
                    out.push_back(v[i]);
                }
            }
            return out;
        };
        pz = split(pz, mz);
        pw = split(pw, mw);
        if (static_cast<long>(pz.size()) * static_cast<long>(pw.size()) * 4 > max_pairs) break;
    }

    const auto& g = gl16();
    auto tensor = [&](const std::vector<Segment>& az, const std::vector<Segment>& aw) {
        CompensatedSum<cplx> total;
        for (const auto& sz : az) {
            cplx hz = 0.5 * (sz.b - sz.a), mz = 0.5 * (sz.a + sz.b);
            for (const auto& sw : aw) {
                cplx hw = 0.5 * (sw.b - sw.a), mw = 0.5 * (sw.a + sw.b);
                cplx acc = 0.0;
                for (std::size_t k = 0; k < g.x.size(); ++k) {
                    cplx z = mz + g.x[k] * hz;
                    cplx inner = 0.0;
                    for (std::size_t l = 0; l < g.x.size(); ++l)
                        inner += g.w[l] * f(z, mw + g.x[l] * hw);
                    acc += g.w[k] * inner;
                }
                total.add(acc * hz * hw);
            }
        }
        return total.value();
    };
    auto bisect_all = [](const std::vector<Segment>& v) {
        std::vector<Segment> out;
        out.reserve(2 * v.size());
        for (const auto& s : v) {
            auto [l, r] = halves(s);
            out.push_back(l);
            out.push_back(r);
        }
        return out;
    };
    cplx prev = tensor(pz, pw);
    for (;;) {
        pz = bisect_all(pz);
        pw = bisect_all(pw);
        cplx cur = tensor(pz, pw);
        double err = std::abs(cur - prev);
        long pairs = static_cast<long>(pz.size()) * static_cast<long>(pw.size());
        if (err < tol) return {cur, err, static_cast<int>(pz.size() + pw.size())};
        if (pairs * 4 > max_pairs)
            throw NumericalError("integrate_double: panel budget exhausted", cur, err);
        prev = cur;
    }
}

double truncate_ray(const std::function<double(double)>& phase_decay, double tol) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    const double threshold = std::log(tol) - 10.0;
    const double r_max = 1e4;
    double r = 0.0;
    double v = phase_decay(r);
    while (r < r_max) {
        double step = std::max(0.01, 0.01 * r);
        double r_next = r + step;
        double v_next = phase_decay(r_next);
        if (v < threshold && v_next < threshold) return r;
        r = r_next;
        v = v_next;
    }
    throw NumericalError("truncate_ray: decay bound not reached by r = 1e4");
}

Contour truncate_rays(const Contour& c, const std::function<double(cplx)>& log_abs, double tol) {
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& p : c.pieces()) {
        if (auto s = std::get_if<Segment>(&p)) {
            for (int k = 0; k <= 8; ++k) peak = std::max(peak, log_abs(s->a + (s->b - s->a) * (k / 8.0)));
        } else {
            const auto& r = std::get<Ray>(p);
            double best = log_abs(r.origin);
            for (double x = 0.0; x < 100.0; x += 0.05) {
                double v = log_abs(r.origin + x * r.direction);
                best = std::max(best, v);
                if (v < best - 200.0) break;
            }
            peak = std::max(peak, best);
        }
    }
    Contour out;
    for (const auto& p : c.pieces()) {
        if (auto r = std::get_if<Ray>(&p); r && !std::isfinite(r->length)) {
            Ray t = *r;
            t.length = truncate_ray([&](double x) { return log_abs(r->origin + x * r->direction) - peak; }, tol);
            out.append(t);
        } else {
            out.append(p);
        }
    }
    return out;
}

namespace {

struct Discretisation {
    std::vector<Segment> panels;
};

std::vector<Segment> adapt(const std::vector<Segment>& segs, const Fn1& f, double tol, int max_depth,
                           int max_panels) {
    double total_len = 0.0;
    for (const auto& s : segs) total_len += seg_len(s);
    std::vector<Segment> work;
    for (const auto& s : segs) {
        double len = seg_len(s);
        if (len == 0.0) continue;
        int k = std::max(1, static_cast<int>(std::ceil(16.0 * len / total_len)));
        for (int j = 0; j < k; ++j)
            work.push_back({s.a + (s.b - s.a) * (double(j) / k), s.a + (s.b - s.a) * (double(j + 1) / k)});
    }
    double scale = 0.0;
    for (const auto& s : work) scale += panel_abs_sum(f, s);
    if (scale == 0.0) return work;

    std::vector<Segment> accepted;
    std::vector<std::pair<Segment, int>> stack;
    for (const auto& s : work) stack.push_back({s, 0});
    while (!stack.empty()) {
        auto [s, depth] = stack.back();
        stack.pop_back();
        auto [l, r] = halves(s);
        cplx coarse = panel_sum(f, s);
        cplx fine = panel_sum(f, l) + panel_sum(f, r);
        double allowed = tol * scale * std::max(seg_len(s) / total_len, 1e-3);
        if (std::abs(fine - coarse) <= allowed || depth >= max_depth) {
            accepted.push_back(l);
            accepted.push_back(r);
        } else {
            stack.push_back({r, depth + 1});
            stack.push_back({l, depth + 1});
        }
        if (static_cast<int>(accepted.size() + stack.size()) > max_panels)
            throw NumericalError("separable_double: panel budget exhausted");
    }
    return accepted;
}

std::vector<Segment> refine_near(std::vector<Segment> panels, const std::vector<Segment>& other,
                                 double ratio, int max_depth) {
    for (int pass = 0; pass < max_depth; ++pass) {
        std::vector<Segment> out;
        bool any = false;
        for (const auto& s : panels) {
            double d = min_distance(s, other);
            if (d == 0.0) throw NumericalError("separable_double: contours intersect");
            if (seg_len(s) > ratio * d) {
                auto [l, r] = halves(s);
                out.push_back(l);
                out.push_back(r);
                any = true;
            } else {
                out.push_back(s);
            }
        }
        panels.swap(out);
        if (!any) break;
    }
    return panels;
}

struct Nodes {
    std::vector<double> re, im;
    std::vector<cplx> weight;  // quadrature weight times dz times the factor
};

Nodes nodes(const std::vector<Segment>& panels, const Fn1& f) {
    const auto& g = gl16();
    Nodes n;
    std::size_t total = panels.size() * g.x.size();
    n.re.reserve(total);
    n.im.reserve(total);
    n.weight.reserve(total);
    for (const auto& s : panels) {
        cplx half = 0.5 * (s.b - s.a), mid = 0.5 * (s.a + s.b);
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            cplx z = mid + g.x[k] * half;
            n.re.push_back(z.real());
            n.im.push_back(z.imag());
            n.weight.push_back(g.w[k] * half * f(z));
        }
    }
    return n;
}

std::pair<cplx, double> pair_sum(const Nodes& z, const Nodes& w) {
    CompensatedSum<cplx> total;
    double abs_total = 0.0;
    const std::size_t nw = w.re.size();
    std::vector<double> wr(nw), wi(nw);
    for (std::size_t j = 0; j < nw; ++j) {
        wr[j] = w.weight[j].real();
        wi[j] = w.weight[j].imag();
    }
    for (std::size_t i = 0; i < z.re.size(); ++i) {
        const double zr = z.re[i], zi = z.im[i];
        double sr = 0.0, si = 0.0, sa = 0.0;
        for (std::size_t j = 0; j < nw; ++j) {
            double dr = zr - w.re[j], di = zi - w.im[j];
            double inv = 1.0 / (dr * dr + di * di);
            // w / d = w * conj(d) / |d|^2
            double pr = (wr[j] * dr + wi[j] * di) * inv;
            double pi = (wi[j] * dr - wr[j] * di) * inv;
            sr += pr;
            si += pi;
            sa += std::sqrt((wr[j] * wr[j] + wi[j] * wi[j]) * inv);
        }
        cplx zw = z.weight[i];
        total.add(zw * cplx(sr, si));
        abs_total += std::abs(zw) * sa;
    }
    return {total.value(), abs_total};
}

std::vector<Segment> bisected(const std::vector<Segment>& v) {
    std::vector<Segment> out;
    out.reserve(2 * v.size());
    for (const auto& s : v) {
        auto [l, r] = halves(s);
        out.push_back(l);
        out.push_back(r);
    }
    return out;
}

}  // namespace

QuadResult separable_double(const Contour& cz, const Fn1& A, const Contour& cw, const Fn1& B,
                            const SeparableOptions& opt) {
    auto sz = cz.segments();
    auto sw = cw.segments();
    auto pz = refine_near(adapt(sz, A, opt.tol, opt.max_depth, opt.max_panels), sw, opt.pole_ratio,
                          opt.max_depth);
    auto pw = refine_near(adapt(sw, B, opt.tol, opt.max_depth, opt.max_panels), sz, opt.pole_ratio,
                          opt.max_depth);
    auto [coarse, abs0] = pair_sum(nodes(pz, A), nodes(pw, B));
    auto fz = bisected(pz), fw = bisected(pw);
    auto [fine, abs1] = pair_sum(nodes(fz, A), nodes(fw, B));
    (void)abs0;
    double err = std::abs(fine - coarse) + 16.0 * kEps * abs1;
    return {fine, err, static_cast<int>(fz.size() + fw.size())};
}

}  // namespace nibm::quad
