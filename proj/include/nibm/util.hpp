#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace nibm {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Neumaier variant of Kahan summation.
template <class T>
class CompensatedSum {
public:
    void add(T x) {
        T t = sum_ + x;
        if (!std::isfinite(t)) {
            sum_ = t;
            return;
        }
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    T value() const { return std::isfinite(sum_) ? sum_ + comp_ : sum_; }

private:
    T sum_{};
    T comp_{};
};

template <>
inline void CompensatedSum<cplx>::add(cplx x) {
    // real and imaginary parts are compensated separately
    double sr = sum_.real(), cr = comp_.real();
    double si = sum_.imag(), ci = comp_.imag();
    auto step = [](double& s, double& c, double v) {
        double t = s + v;
        if (!std::isfinite(t)) {
            s = t;
            return;
        }
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    };
    step(sr, cr, x.real());
    step(si, ci, x.imag());
    sum_ = {sr, si};
    comp_ = {cr, ci};
}

template <>
inline cplx CompensatedSum<cplx>::value() const {
    auto part = [](double s, double c) { return std::isfinite(s) ? s + c : s; };
    return {part(sum_.real(), comp_.real()), part(sum_.imag(), comp_.imag())};
}

// Determinant of the row-major n x n matrix a by LU with partial pivoting.
template <class T>
T determinant(std::vector<T> a, std::size_t n) {
    T det = T(1);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (a[piv * n + k] == T(0)) return T(0);
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            det = -det;
        }
        T d = a[k * n + k];
        det *= d;
        for (std::size_t i = k + 1; i < n; ++i) {
            T f = a[i * n + k] / d;
            if (f == T(0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return det;
}

// Worker count: NIBM_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, count) across thread_count() workers.
// Each index is processed exactly once; the body must be thread safe.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace nibm
