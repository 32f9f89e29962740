#pragma once

#include <vector>

#include "nibm/measure.hpp"

namespace nibm::biane {

using measure::EmpiricalMeasure;

struct DensitySample {
    double x_tilde;
    double psi;
};

struct DensityProfile {
    double t;
    std::vector<DensitySample> samples;
};

struct Interval {
    double lo;
    double hi;
};

enum class BoundaryKind { UpperEdge, LowerEdge, Merging };
const char* boundary_kind_name(BoundaryKind k);

struct BoundaryPoint {
    double x_star;
    double position;
    double time;
    BoundaryKind kind;
};

double y_function(const EmpiricalMeasure& mu, double t, double x);
double forward_map(const EmpiricalMeasure& mu, double t, double x);
DensityProfile density(const EmpiricalMeasure& mu, double t, const std::vector<double>& x_grid);

// Maximal intervals (in the initial coordinate x) on which y_function > 0.
std::vector<Interval> preimage_support(const EmpiricalMeasure& mu, double t);
// Images of preimage_support under forward_map: the support of mu boxplus sigma_t.
std::vector<Interval> support(const EmpiricalMeasure& mu, double t);

// Density profile over the whole support, `per_interval` nodes per interval,
// clustered towards the edges.
DensityProfile density_on_support(const EmpiricalMeasure& mu, double t, int per_interval);
// Trapezoid mass of a profile (gaps between intervals carry zero mass).
double profile_mass(const DensityProfile& profile);

double merging_initial_point(const EmpiricalMeasure& mu, Interval gap);
BoundaryPoint boundary_point(const EmpiricalMeasure& mu, double x_star);

// Points x + i y(x) on [lo, hi], `count` nodes clustered towards both ends.
std::vector<cplx> graph_nodes(const EmpiricalMeasure& mu, double t, Interval iv, int count);

}  // namespace nibm::biane
