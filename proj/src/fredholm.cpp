#include "nibm/fredholm.hpp"

#include <algorithm>
#include <boost/math/special_functions/airy.hpp>
#include <cmath>

#include "nibm/errors.hpp"
#include "nibm/kernels.hpp"
#include "nibm/quadrature.hpp"

namespace nibm::fredholm {

namespace {

void validate(const GapSpec& spec) {
    if (spec.slices.empty()) throw DomainError("gap spec needs at least one slice");
    if (spec.quad_order < 8 || spec.quad_order % 2 != 0)
        throw DomainError("quad_order must be even and at least 8");
    if (!(spec.cutoff > 0.0)) throw DomainError("cutoff R must be positive");
    for (std::size_t j = 0; j < spec.slices.size(); ++j) {
        if (!std::isfinite(spec.slices[j].tau) || !std::isfinite(spec.slices[j].threshold))
            throw DomainError("slice parameters must be finite");
        if (j > 0 && !(spec.slices[j].tau > spec.slices[j - 1].tau))
            throw DomainError("slice times must be strictly increasing");
    }
}

void check_cutoff(double shifted_threshold, double cutoff) {
    double end = shifted_threshold + cutoff;
    if (std::abs(kernels::static_airy_kernel(end, end)) >= 1e-12)
        throw DomainError("cutoff R too small: kernel at a + R exceeds 1e-12, increase R");
}

}  // namespace

double fredholm_det(const GapSpec& spec) {
    validate(spec);
    const auto& g = quad::gauss_legendre(spec.quad_order);
    const std::size_t m = g.x.size();
    const std::size_t k = spec.slices.size();
    const double R = spec.cutoff;
    for (const auto& sl : spec.slices) check_cutoff(sl.threshold + sl.tau * sl.tau, R);

    // nodes and square-root weights per slice
    std::vector<double> x(k * m), sw(k * m);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            x[j * m + i] = spec.slices[j].threshold + 0.5 * R * (1.0 + g.x[i]);
            sw[j * m + i] = std::sqrt(0.5 * R * g.w[i]);
        }
    const std::size_t N = k * m;
    std::vector<double> a(N * N, 0.0);

    if (k == 1) {
        double shift = spec.slices[0].tau * spec.slices[0].tau;
        parallel_for(m, [&](std::size_t p) {
            for (std::size_t q = 0; q < m; ++q)
                a[p * N + q] = -sw[p] * kernels::static_airy_kernel(x[p] + shift, x[q] + shift) * sw[q];
        });
    } else {
        // lambda-grid for the integral over shifted Airy products
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& sl : spec.slices) lowest = std::min(lowest, sl.threshold + sl.tau * sl.tau);
        int panels = static_cast<int>(std::ceil(std::max(4.0, 16.0 - lowest)));
        const auto& gl = quad::gauss_legendre(16);
        std::vector<double> lam, lw;
        for (int p = 0; p < panels; ++p)
            for (std::size_t i = 0; i < gl.x.size(); ++i) {
                lam.push_back(p + 0.5 + 0.5 * gl.x[i]);
                lw.push_back(0.5 * gl.w[i]);
            }
        const std::size_t L = lam.size();
        std::vector<double> ai(N * L);
        parallel_for(N, [&](std::size_t r) {
            double tau = spec.slices[r / m].tau;
            for (std::size_t l = 0; l < L; ++l)
                ai[r * L + l] = boost::math::airy_ai(x[r] + tau * tau + lam[l]);
        });
        auto phi = [](double tau, double u) { return u * tau + 2.0 * tau * tau * tau / 3.0; };
        parallel_for(N, [&](std::size_t r) {
            std::size_t bi = r / m;
            double ti = spec.slices[bi].tau;
            std::vector<double> wl(L);
            for (std::size_t c = 0; c < N; ++c) {
                std::size_t bj = c / m;
                double tj = spec.slices[bj].tau;
                if (c % m == 0)
                    for (std::size_t l = 0; l < L; ++l) wl[l] = lw[l] * std::exp(lam[l] * (ti - tj));
                CompensatedSum<double> s;
                for (std::size_t l = 0; l < L; ++l) s.add(wl[l] * ai[r * L + l] * ai[c * L + l]);
                double kv = s.value();
                if (ti > tj) {
                    kernels::KernelPoint p{ti, tj, x[r], x[c]};
                    kv -= kernels::heat_term(p, kernels::HeatConvention::Quarter) *
                          std::exp(-phi(ti, x[r]) + phi(tj, x[c]));
                }
                a[r * N + c] = -sw[r] * kv * sw[c];
            }
        });
    }
    for (std::size_t i = 0; i < N; ++i) a[i * N + i] += 1.0;
    return determinant(std::move(a), N);
}

double tracy_widom_cdf(double s, int quad_order, double cutoff) {
    if (!(s >= -10.0 && s <= 10.0)) throw DomainError("tracy_widom_cdf is limited to s in [-10, 10]");
    GapSpec spec{{{0.0, s}}, quad_order, std::max(cutoff, 12.0 - s)};
    return fredholm_det(spec);
}

}  // namespace nibm::fredholm
