#pragma once

#include <vector>

namespace nibm::fredholm {

struct Slice {
    double tau;
    double threshold;  // a_j: the operator acts on (a_j, a_j + R)
};

struct GapSpec {
    std::vector<Slice> slices;
    int quad_order = 48;   // Gauss-Legendre nodes per slice, even, >= 8
    double cutoff = 14.0;  // R
};

// P(no point of the Airy line ensemble above a_j at time tau_j for every j),
// as det(I - K) on the union of the slices. A single slice uses the static
// kernel at a + tau^2; several slices use the extended kernel built from its
// integral representation over shifted Airy products.
double fredholm_det(const GapSpec& spec);

// F_2(s) with cutoff max(R, 12 - s).
double tracy_widom_cdf(double s, int quad_order = 48, double cutoff = 14.0);

}  // namespace nibm::fredholm
