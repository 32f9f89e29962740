#include "nibm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "nibm/errors.hpp"

namespace nibm::measure {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_off_atoms(const EmpiricalMeasure& mu, cplx z) {
    for (const auto& a : mu.atoms())
        if (z.real() == a.x && z.imag() == 0.0)
            throw DomainError("evaluation point coincides with an atom at " +
                              std::to_string(a.x));
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<Atom> atoms) {
    if (atoms.empty()) throw DomainError("measure has no atoms");
    for (const auto& a : atoms) {
        if (!std::isfinite(a.x)) throw DomainError("atom position is not finite");
        if (!(a.w > 0.0) || !std::isfinite(a.w))
            throw DomainError("atom weight must be positive and finite");
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& l, const Atom& r) { return l.x < r.x; });
    CompensatedSum<double> total;
    for (const auto& a : atoms) {
        total.add(a.w);
        if (!atoms_.empty() && atoms_.back().x == a.x)
            atoms_.back().w += a.w;
        else
            atoms_.push_back(a);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw DomainError("weights sum to " + std::to_string(total.value()) + ", not 1");
}

EmpiricalMeasure EmpiricalMeasure::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("measure JSON parse error: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("atoms") || !doc["atoms"].is_array())
        throw DomainError("measure JSON needs an \"atoms\" array");
    const auto& arr = doc["atoms"];
    if (arr.empty()) throw DomainError("measure has no atoms");
    std::size_t weighted = 0;
    for (const auto& item : arr) {
        if (!item.is_object() || !item.contains("x") || !item["x"].is_number())
            throw DomainError("each atom needs a numeric \"x\"");
        if (item.contains("w")) {
            if (!item["w"].is_number()) throw DomainError("atom weight must be numeric");
            ++weighted;
        }
    }
    if (weighted != 0 && weighted != arr.size())
        throw DomainError("either all atoms carry \"w\" or none do");
    std::vector<Atom> atoms;
    atoms.reserve(arr.size());
    double uniform = 1.0 / static_cast<double>(arr.size());
    for (const auto& item : arr)
        atoms.push_back({item["x"].get<double>(),
                         weighted ? item["w"].get<double>() : uniform});
    return EmpiricalMeasure(std::move(atoms));
}

EmpiricalMeasure EmpiricalMeasure::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open measure file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

EmpiricalMeasure EmpiricalMeasure::from_points(const std::vector<double>& points) {
    if (points.empty()) throw DomainError("measure has no atoms");
    std::vector<Atom> atoms;
    atoms.reserve(points.size());
    double w = 1.0 / static_cast<double>(points.size());
    for (double p : points) atoms.push_back({p, w});
    return EmpiricalMeasure(std::move(atoms));
}

bool EmpiricalMeasure::is_atom(double x) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, double v) { return a.x < v; });
    return it != atoms_.end() && it->x == x;
}

EmpiricalMeasure EmpiricalMeasure::mirrored() const {
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) out.push_back({-a.x, a.w});
    return EmpiricalMeasure(std::move(out));
}

std::vector<int> EmpiricalMeasure::multiplicities(int n) const {
    if (n < 1) throw DomainError("n must be positive");
    std::vector<int> m;
    m.reserve(atoms_.size());
    long total = 0;
    for (const auto& a : atoms_) {
        double v = a.w * n;
        double r = std::round(v);
        if (std::abs(v - r) > 1e-9 * n || r < 1.0)
            throw DomainError("n*w is not a positive integer for atom at " +
                              std::to_string(a.x) + " (n=" + std::to_string(n) + ")");
        m.push_back(static_cast<int>(r));
        total += static_cast<long>(r);
    }
    if (total != n) throw DomainError("multiplicities do not add up to n");
    return m;
}

std::vector<double> EmpiricalMeasure::starting_points(int n) const {
    auto m = multiplicities(n);
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < atoms_.size(); ++k)
        for (int j = 0; j < m[k]; ++j) pts.push_back(atoms_[k].x);
    return pts;
}

std::string EmpiricalMeasure::to_json() const {
    nlohmann::json doc;
    doc["atoms"] = nlohmann::json::array();
    for (const auto& a : atoms_) doc["atoms"].push_back({{"x", a.x}, {"w", a.w}});
    return doc.dump();
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::AiryEdge: return "Airy";
        case Regime::PearceyMerging: return "Pearcey";
        case Regime::Transition: return "Transition";
    }
    return "?";
}

cplx stieltjes(const EmpiricalMeasure& mu, cplx z) {
    require_off_atoms(mu, z);
    CompensatedSum<cplx> s;
    for (const auto& a : mu.atoms()) s.add(a.w / (z - a.x));
    return s.value();
}

StieltjesJet jet_at(const EmpiricalMeasure& mu, double x_star) {
    if (mu.is_atom(x_star))
        throw DomainError("x* = " + std::to_string(x_star) + " is an atom");
    CompensatedSum<double> s1, s2, s3, s4;
    for (const auto& a : mu.atoms()) {
        double inv = 1.0 / (x_star - a.x);
        double p = a.w * inv;
        s1.add(p);
        p *= inv;
        s2.add(p);
        p *= inv;
        s3.add(p);
        p *= inv;
        s4.add(p);
    }
    return {s1.value(), -s2.value(), 2.0 * s3.value(), -6.0 * s4.value()};
}

cplx log_transform(const EmpiricalMeasure& mu, cplx z) {
    require_off_atoms(mu, z);
    CompensatedSum<cplx> s;
    for (const auto& a : mu.atoms()) s.add(a.w * std::log(z - a.x));
    return s.value();
}

Assumption2Check check_assumption2(const EmpiricalMeasure& mu, double x_star,
                                   double bound_C) {
    if (mu.is_atom(x_star)) return {false, std::numeric_limits<double>::infinity()};
    CompensatedSum<double> s;
    for (const auto& a : mu.atoms()) s.add(a.w * std::pow(std::abs(x_star - a.x), -5.0));
    double m5 = s.value();
    return {m5 <= bound_C, m5};
}

double critical_time(const EmpiricalMeasure& mu, double x_star) {
    return -1.0 / jet_at(mu, x_star).g1;
}

double evolve(const EmpiricalMeasure& mu, double x_star, double t) {
    if (t < 0.0) throw DomainError("evolve needs t >= 0");
    return x_star + t * jet_at(mu, x_star).g0;
}

namespace {

ScalingFrame frame_from_jet(double x_star, int n, StieltjesJet jet, Thresholds th) {
    ScalingFrame f{};
    f.x_star = x_star;
    f.n = n;
    f.jet = jet;
    f.t_cr = -1.0 / jet.g1;
    f.index_I = std::pow(static_cast<double>(n), 0.25) * jet.g2 / 2.0;
    f.c2 = jet.g2 > 0.0 ? std::pow(jet.g2 / 2.0, -1.0 / 3.0) / f.t_cr : kNaN;
    f.c3 = std::pow(-jet.g3 / 6.0, -0.25) / f.t_cr;
    double absI = std::abs(f.index_I);
    f.a = std::pow(-jet.g3, -0.75) * absI;
    f.a_phase = std::pow(-jet.g3 / 6.0, -0.75) * absI;
    if (absI < th.low)
        f.regime = Regime::PearceyMerging;
    else if (absI > th.high)
        f.regime = Regime::AiryEdge;
    else
        f.regime = Regime::Transition;
    f.needs_mirror = jet.g2 < 0.0;
    return f;
}

}  // namespace

ScalingFrame scaling_frame(const EmpiricalMeasure& mu, double x_star, int n,
                           Thresholds thresholds) {
    if (n < 1) throw DomainError("n must be positive");
    if (!(thresholds.low >= 0.0 && thresholds.low <= thresholds.high))
        throw DomainError("regime thresholds need 0 <= low <= high");
    StieltjesJet jet = jet_at(mu, x_star);
    if (!(jet.g1 < 0.0)) throw DomainError("G^(1) must be negative");
    return frame_from_jet(x_star, n, jet, thresholds);
}

ScalingFrame mirrored_frame(const ScalingFrame& frame) {
    ScalingFrame f = frame;
    f.x_star = -frame.x_star;
    f.jet = {-frame.jet.g0, frame.jet.g1, -frame.jet.g2, frame.jet.g3};
    f.index_I = -frame.index_I;
    f.c2 = f.jet.g2 > 0.0 ? std::pow(f.jet.g2 / 2.0, -1.0 / 3.0) / f.t_cr : kNaN;
    f.needs_mirror = f.jet.g2 < 0.0;
    return f;
}

double time_scaling(const ScalingFrame& frame, double tau, TimeBranch which) {
    double t;
    if (which == TimeBranch::E) {
        if (!(frame.jet.g2 > 0.0))
            throw DomainError("E time scaling needs G^(2) > 0 (reflect the measure first)");
        t = frame.t_cr + 2.0 * tau / (frame.c2 * frame.c2 * std::cbrt(double(frame.n)));
    } else {
        t = frame.t_cr + tau / (frame.c3 * frame.c3 * std::sqrt(double(frame.n)));
    }
    if (!(t > 0.0)) throw DomainError("scaled time is not positive");
    return t;
}

double gauge(int n, const ScalingFrame& frame, double s, double x) {
    double g0 = frame.jet.g0;
    return -n * g0 * x + n * g0 * g0 * s / 2.0;
}

double point_with_index(const EmpiricalMeasure& mu, int n, double target, double lo, double hi) {
    if (n < 1 || !(lo < hi)) throw DomainError("point_with_index needs n >= 1 and lo < hi");
    auto f = [&](double x) {
        if (mu.is_atom(x)) throw DomainError("index bracket touches an atom");
        return std::pow(static_cast<double>(n), 0.25) * jet_at(mu, x).g2 / 2.0 - target;
    };
    double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0.0) throw DomainError("index target is not bracketed");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        double mid = 0.5 * (lo + hi);
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

}  // namespace nibm::measure
