#pragma once

#include <string>
#include <vector>

#include "nibm/util.hpp"

namespace nibm::measure {

struct Atom {
    double x;
    double w;
};

// Finite atomic probability measure. Atoms are kept sorted by position and
// coincident positions are merged.
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(std::vector<Atom> atoms);

    // {"atoms": [{"x": .., "w": ..}, ...]}, weights optional (uniform if absent).
    static EmpiricalMeasure from_json(const std::string& text);
    static EmpiricalMeasure load(const std::string& path);
    // Uniform weights on the given positions.
    static EmpiricalMeasure from_points(const std::vector<double>& points);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double min_position() const { return atoms_.front().x; }
    double max_position() const { return atoms_.back().x; }
    bool is_atom(double x) const;

    // Atoms and weights reflected through the origin.
    EmpiricalMeasure mirrored() const;

    // Integer multiplicities n*w_k; throws unless every n*w_k is integral.
    std::vector<int> multiplicities(int n) const;
    // The n ordered starting points realising this measure at size n.
    std::vector<double> starting_points(int n) const;

    std::string to_json() const;

private:
    std::vector<Atom> atoms_;
};

struct StieltjesJet {
    double g0, g1, g2, g3;
};

enum class Regime { AiryEdge, PearceyMerging, Transition };
const char* regime_name(Regime r);

struct Thresholds {
    double low = 0.2;
    double high = 5.0;
};

struct ScalingFrame {
    double x_star;
    int n;
    StieltjesJet jet;
    double t_cr;
    double index_I;
    double c2;       // NaN unless g2 > 0
    double c3;
    double a;        // (-g3)^(-3/4) |I_n|
    double a_phase;  // (-g3/6)^(-3/4) |I_n|, the cubic coefficient of the local phase
    Regime regime;
    bool needs_mirror;  // g2 < 0: downstream work runs on the reflected problem
};

struct Assumption2Check {
    bool pass;
    double fifth_moment;  // +inf when x_star is an atom
};

enum class TimeBranch { E, M };

cplx stieltjes(const EmpiricalMeasure& mu, cplx z);
StieltjesJet jet_at(const EmpiricalMeasure& mu, double x_star);
cplx log_transform(const EmpiricalMeasure& mu, cplx z);
Assumption2Check check_assumption2(const EmpiricalMeasure& mu, double x_star, double bound_C);
double critical_time(const EmpiricalMeasure& mu, double x_star);
double evolve(const EmpiricalMeasure& mu, double x_star, double t);
ScalingFrame scaling_frame(const EmpiricalMeasure& mu, double x_star, int n,
                           Thresholds thresholds = {});
// The frame of the reflected problem (atoms and x_star negated).
ScalingFrame mirrored_frame(const ScalingFrame& frame);
double time_scaling(const ScalingFrame& frame, double tau, TimeBranch which);
double gauge(int n, const ScalingFrame& frame, double s, double x);
// Bisection for x in [lo, hi] with I_n(x) = target; I_n - target must change
// sign on the bracket.
double point_with_index(const EmpiricalMeasure& mu, int n, double target, double lo, double hi);

}  // namespace nibm::measure
