#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "nibm/measure.hpp"

namespace nibm::sim {

using measure::EmpiricalMeasure;

enum class Method { Matrix, SDE };

struct SimConfig {
    int n = 1;
    std::vector<double> start;   // n nondecreasing starting points
    std::vector<double> t_grid;  // increasing positive output times
    double dt = 1e-3;            // SDE step (ignored by the matrix method)
    std::uint64_t seed = 1;
    Method method = Method::Matrix;
    bool noise = true;  // false: deterministic repulsion only (diagnostic)

    static SimConfig from_measure(const EmpiricalMeasure& mu, int n, std::vector<double> t_grid,
                                  Method method, std::uint64_t seed, double dt = 1e-3);
    void validate() const;
};

struct Diagnostics {
    long rejected_steps = 0;     // SDE steps redone with a smaller step
    long total_steps = 0;
    double bootstrap_time = 0;   // matrix warm-up used before SDE steps
    double max_trace_defect = 0; // matrix method: |sum eigenvalues - trace|
    int max_sweeps = 0;
};

struct PathEnsemble {
    int n = 0;
    std::size_t replicas = 0;
    std::vector<double> times;
    std::vector<double> values;  // [replica][time][index]
    Diagnostics diag;

    double at(std::size_t replica, std::size_t time_index, int i) const {
        return values[(replica * times.size() + time_index) * n + i];
    }
    std::vector<double> spectrum(std::size_t replica, std::size_t time_index) const;
    std::vector<double> pooled(std::size_t time_index) const;
};

// Per-replica generator seeded from (seed, replica) through SplitMix64.
std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica);

// Eigenvalues (ascending) of a Hermitian matrix, row-major, by cyclic Jacobi
// sweeps until the off-diagonal norm is below tol times the Frobenius norm.
std::vector<double> hermitian_eigenvalues(std::vector<std::complex<double>> a, int n,
                                          double tol = 1e-10, int* sweeps = nullptr);

PathEnsemble simulate(const SimConfig& cfg, std::size_t replicas);

EmpiricalMeasure empirical_at(const PathEnsemble& ens, std::size_t replica, std::size_t time_index);
EmpiricalMeasure pooled_at(const PathEnsemble& ens, std::size_t time_index);

// Largest eigenvalue <= threshold for every replica; nullopt when none is.
std::vector<std::optional<double>> largest_below(const PathEnsemble& ens, std::size_t time_index,
                                                 double threshold);

// sup |F_emp - F| for a sample (sorted internally) against a continuous CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

// CDF of the deterministic equivalent at time t, by cumulative trapezoid over
// the Biane density profile.
std::function<double(double)> deterministic_cdf(const EmpiricalMeasure& mu, double t,
                                                int nodes_per_interval = 2000);

struct RandomStartSummary {
    std::vector<double> rescaled;  // k_n n^(2/3)(x_max - b_n), pooled
    int skipped = 0;               // spectra failing the mass or Assumption-2 checks
    double ks_to_tracy_widom = 0;
};

// Spectra from `sampler` are pushed through a GUE component of variance t; the
// top eigenvalue of each replica is centred at the right edge b_n of
// mu_n boxplus sigma_t and scaled by its own c2.
RandomStartSummary random_start_demo(
    const std::function<std::vector<double>(std::mt19937_64&)>& sampler, double t, int n,
    std::size_t replicas, std::uint64_t seed, double bound_C = 1e6);

}  // namespace nibm::sim
