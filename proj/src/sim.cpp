#include "nibm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "nibm/biane.hpp"
#include "nibm/errors.hpp"
#include "nibm/fredholm.hpp"

namespace nibm::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double min_gap(const std::vector<double>& x) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
    return g;
}

bool strictly_ordered(const std::vector<double>& x) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) return false;
    return true;
}

struct ReplicaDiag {
    long rejected = 0;
    long steps = 0;
    double boot = 0;
    double trace_defect = 0;
    int sweeps = 0;
};

// Hermitian Brownian motion started at diag(start), observed at `times`.
// Each output is the ordered spectrum of diag(start) + B(t)/sqrt(n).
class MatrixPath {
public:
    MatrixPath(const std::vector<double>& start, std::mt19937_64& rng)
        : n_(static_cast<int>(start.size())), start_(start), b_(n_ * n_), rng_(rng) {}

    std::vector<double> advance_to(double t, ReplicaDiag& d) {
        double dt = t - now_;
        if (dt > 0.0) {
            std::normal_distribution<double> z(0.0, 1.0);
            double sd = std::sqrt(dt), so = std::sqrt(dt / 2.0);
            for (int i = 0; i < n_; ++i) {
                b_[i * n_ + i] += sd * z(rng_);
                for (int j = i + 1; j < n_; ++j) {
                    double re = so * z(rng_);
                    double im = so * z(rng_);
                    b_[i * n_ + j] += cplx(re, im);
                    b_[j * n_ + i] = std::conj(b_[i * n_ + j]);
                }
            }
            now_ = t;
        }
        double scale = 1.0 / std::sqrt(static_cast<double>(n_));
        std::vector<cplx> h(b_.size());
        CompensatedSum<double> trace;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                h[i * n_ + j] = b_[i * n_ + j] * scale;
                if (i == j) {
                    h[i * n_ + i] = cplx(h[i * n_ + i].real() + start_[i], 0.0);
                    trace.add(h[i * n_ + i].real());
                }
            }
        int sweeps = 0;
        auto ev = hermitian_eigenvalues(std::move(h), n_, 1e-10, &sweeps);
        CompensatedSum<double> sum;
        for (double v : ev) sum.add(v);
        d.trace_defect = std::max(d.trace_defect, std::abs(sum.value() - trace.value()));
        d.sweeps = std::max(d.sweeps, sweeps);
        return ev;
    }

private:
    int n_;
    std::vector<double> start_;
    std::vector<cplx> b_;
    std::mt19937_64& rng_;
    double now_ = 0.0;
};

void run_matrix(const SimConfig& cfg, std::mt19937_64& rng, double* out, ReplicaDiag& d) {
    MatrixPath path(cfg.start, rng);
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        auto ev = path.advance_to(cfg.t_grid[ti], d);
        std::copy(ev.begin(), ev.end(), out + ti * cfg.n);
    }
}

void run_sde(const SimConfig& cfg, std::mt19937_64& rng, double* out, ReplicaDiag& d) {
    const int n = cfg.n;
    const double inv_n = 1.0 / n;
    const double noise_scale = cfg.noise ? std::sqrt(inv_n) : 0.0;
    std::vector<double> lam = cfg.start;
    double t = 0.0;
    if (n > 1 && !strictly_ordered(lam)) {
        // coincident starts: the drift is singular, so let the exact matrix
        // dynamics separate the particles first
        if (!cfg.noise) throw DomainError("noiseless SDE needs distinct starting points");
        double boot = std::min(1e-3, 0.01 * cfg.t_grid.front());
        MatrixPath path(cfg.start, rng);
        lam = path.advance_to(boot, d);
        t = boot;
        d.boot = boot;
    }
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> drift(n), xi(n), cand(n);
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        const double target = cfg.t_grid[ti];
        while (t < target) {
            for (int i = 0; i < n; ++i) {
                CompensatedSum<double> s;
                for (int j = 0; j < n; ++j)
                    if (j != i) s.add(1.0 / (lam[i] - lam[j]));
                drift[i] = inv_n * s.value();
            }
            double gap = min_gap(lam);
            double h = std::min({cfg.dt, 0.1 * n * gap * gap, target - t});
            bool last = target - t - h < 1e-15 * std::max(1.0, target);
            if (last) h = target - t;
            bool accepted = false;
            for (int attempt = 0; attempt <= 20; ++attempt) {
                double sh = std::sqrt(h);
                for (int i = 0; i < n; ++i) {
                    xi[i] = cfg.noise ? z(rng) : 0.0;
                    cand[i] = lam[i] + drift[i] * h + noise_scale * sh * xi[i];
                }
                if (strictly_ordered(cand)) {
                    accepted = true;
                    break;
                }
                ++d.rejected;
                h *= 0.5;
                last = false;
            }
            if (!accepted)
                throw NumericalError("SDE step floor reached: ordering violated after 20 halvings");
            lam.swap(cand);
            t = last ? target : t + h;
            ++d.steps;
        }
        std::copy(lam.begin(), lam.end(), out + ti * n);
    }
}

}  // namespace

SimConfig SimConfig::from_measure(const EmpiricalMeasure& mu, int n, std::vector<double> t_grid,
                                  Method method, std::uint64_t seed, double dt) {
    SimConfig c;
    c.n = n;
    c.start = mu.starting_points(n);
    c.t_grid = std::move(t_grid);
    c.dt = dt;
    c.seed = seed;
    c.method = method;
    return c;
}

void SimConfig::validate() const {
    if (n < 1) throw DomainError("simulation needs n >= 1");
    if (static_cast<int>(start.size()) != n) throw DomainError("need exactly n starting points");
    for (std::size_t i = 0; i < start.size(); ++i) {
        if (!std::isfinite(start[i])) throw DomainError("starting points must be finite");
        if (i > 0 && start[i] < start[i - 1]) throw DomainError("starting points must be nondecreasing");
    }
    if (t_grid.empty()) throw DomainError("time grid is empty");
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (!(t_grid[i] > (i ? t_grid[i - 1] : 0.0)) || !std::isfinite(t_grid[i]))
            throw DomainError("time grid must be positive and strictly increasing");
    if (method == Method::SDE && !(dt > 0.0)) throw DomainError("SDE step dt must be positive");
}

std::vector<double> PathEnsemble::spectrum(std::size_t replica, std::size_t time_index) const {
    auto first = values.begin() + static_cast<std::ptrdiff_t>((replica * times.size() + time_index) * n);
    return {first, first + n};
}

std::vector<double> PathEnsemble::pooled(std::size_t time_index) const {
    std::vector<double> all;
    all.reserve(replicas * n);
    for (std::size_t r = 0; r < replicas; ++r) {
        auto s = spectrum(r, time_index);
        all.insert(all.end(), s.begin(), s.end());
    }
    std::sort(all.begin(), all.end());
    return all;
}

std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica) {
    std::uint64_t state = seed;
    std::uint64_t a = splitmix64(state);
    state ^= replica * 0xd1342543de82ef95ULL;
    std::uint64_t b = splitmix64(state);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

std::vector<double> hermitian_eigenvalues(std::vector<cplx> a, int n, double tol, int* sweeps) {
    if (n < 1 || a.size() != static_cast<std::size_t>(n) * n)
        throw DomainError("matrix size mismatch");
    auto at = [&](int i, int j) -> cplx& { return a[static_cast<std::size_t>(i) * n + j]; };
    double frob2 = 0.0;
    for (const auto& v : a) frob2 += std::norm(v);
    const double limit2 = tol * tol * frob2;
    int sweep = 0;
    for (;; ++sweep) {
        double off2 = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off2 += 2.0 * std::norm(at(p, q));
        if (off2 <= limit2) break;
        if (sweep >= 100) throw NumericalError("Jacobi eigensolver did not converge in 100 sweeps");
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                cplx g = at(p, q);
                double ag = std::abs(g);
                if (ag == 0.0) continue;
                double ap = at(p, p).real(), aq = at(q, q).real();
                cplx e = g / ag;
                double zeta = (aq - ap) / (2.0 * ag);
                double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                cplx ce = std::conj(e);
                for (int k = 0; k < n; ++k) {
                    cplx kp = at(k, p), kq = at(k, q);
                    at(k, p) = c * kp - s * ce * kq;
                    at(k, q) = s * kp + c * ce * kq;
                }
                for (int k = 0; k < n; ++k) {
                    cplx pk = at(p, k), qk = at(q, k);
                    at(p, k) = c * pk - s * e * qk;
                    at(q, k) = s * pk + c * e * qk;
                }
                at(p, p) = ap - t * ag;
                at(q, q) = aq + t * ag;
                at(p, q) = at(q, p) = 0.0;
            }
    }
    if (sweeps) *sweeps = sweep;
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i).real();
    std::sort(ev.begin(), ev.end());
    return ev;
}

PathEnsemble simulate(const SimConfig& cfg, std::size_t replicas) {
    cfg.validate();
    if (replicas == 0) throw DomainError("need at least one replica");
    PathEnsemble ens;
    ens.n = cfg.n;
    ens.replicas = replicas;
    ens.times = cfg.t_grid;
    ens.values.assign(replicas * cfg.t_grid.size() * cfg.n, 0.0);
    std::vector<ReplicaDiag> diag(replicas);
    std::vector<std::exception_ptr> failures(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        try {
            auto rng = replica_engine(cfg.seed, r);
            double* out = ens.values.data() + r * cfg.t_grid.size() * cfg.n;
            if (cfg.method == Method::Matrix)
                run_matrix(cfg, rng, out, diag[r]);
            else
                run_sde(cfg, rng, out, diag[r]);
        } catch (...) {
            failures[r] = std::current_exception();
        }
    });
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    for (const auto& d : diag) {
        ens.diag.rejected_steps += d.rejected;
        ens.diag.total_steps += d.steps;
        ens.diag.bootstrap_time = std::max(ens.diag.bootstrap_time, d.boot);
        ens.diag.max_trace_defect = std::max(ens.diag.max_trace_defect, d.trace_defect);
        ens.diag.max_sweeps = std::max(ens.diag.max_sweeps, d.sweeps);
    }
    return ens;
}

EmpiricalMeasure empirical_at(const PathEnsemble& ens, std::size_t replica, std::size_t time_index) {
    if (replica >= ens.replicas || time_index >= ens.times.size())
        throw DomainError("replica or time index out of range");
    return EmpiricalMeasure::from_points(ens.spectrum(replica, time_index));
}

EmpiricalMeasure pooled_at(const PathEnsemble& ens, std::size_t time_index) {
    if (time_index >= ens.times.size()) throw DomainError("time index out of range");
    return EmpiricalMeasure::from_points(ens.pooled(time_index));
}

std::vector<std::optional<double>> largest_below(const PathEnsemble& ens, std::size_t time_index,
                                                 double threshold) {
    if (time_index >= ens.times.size()) throw DomainError("time index out of range");
    std::vector<std::optional<double>> out(ens.replicas);
    for (std::size_t r = 0; r < ens.replicas; ++r)
        for (int i = ens.n - 1; i >= 0; --i) {
            double v = ens.at(r, time_index, i);
            if (v <= threshold) {
                out[r] = v;
                break;
            }
        }
    return out;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("empty sample");
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max({d, std::abs(f - i / m), std::abs((i + 1) / m - f)});
    }
    return d;
}

std::function<double(double)> deterministic_cdf(const EmpiricalMeasure& mu, double t,
                                                int nodes_per_interval) {
    if (!(t > 0.0)) throw DomainError("deterministic_cdf needs t > 0");
    auto prof = biane::density_on_support(mu, t, nodes_per_interval);
    std::vector<double> xs, cum;
    xs.reserve(prof.samples.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < prof.samples.size(); ++i) {
        const auto& s = prof.samples[i];
        if (i > 0) {
            const auto& p = prof.samples[i - 1];
            acc += 0.5 * (s.psi + p.psi) * (s.x_tilde - p.x_tilde);
        }
        xs.push_back(s.x_tilde);
        cum.push_back(acc);
    }
    for (double& c : cum) c /= acc;
    return [xs = std::move(xs), cum = std::move(cum)](double x) {
        if (x <= xs.front()) return 0.0;
        if (x >= xs.back()) return 1.0;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t j = static_cast<std::size_t>(it - xs.begin());
        double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return cum[j - 1] + w * (cum[j] - cum[j - 1]);
    };
}

namespace {

// x* to the right of every atom with t_cr(x*) = t; t_cr increases from 0 to
// infinity on that half-line.
double edge_preimage(const EmpiricalMeasure& mu, double t) {
    double lo = mu.max_position();
    double hi = lo + 1.0;
    while (measure::critical_time(mu, hi) < t) hi = lo + 2.0 * (hi - lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        (measure::critical_time(mu, mid) < t ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

RandomStartSummary random_start_demo(
    const std::function<std::vector<double>(std::mt19937_64&)>& sampler, double t, int n,
    std::size_t replicas, std::uint64_t seed, double bound_C) {
    if (!(t > 0.0)) throw DomainError("random_start_demo needs t > 0");
    if (n < 2 || replicas == 0) throw DomainError("random_start_demo needs n >= 2 and replicas >= 1");
    std::vector<std::optional<double>> values(replicas);
    std::vector<std::exception_ptr> failures(replicas);
    parallel_for(replicas, [&](std::size_t r) {
        try {
            auto rng = replica_engine(seed, r);
            auto spec = sampler(rng);
            if (static_cast<int>(spec.size()) != n) return;
            for (double v : spec)
                if (!std::isfinite(v)) return;
            std::sort(spec.begin(), spec.end());
            auto mu = EmpiricalMeasure::from_points(spec);
            double xs = edge_preimage(mu, t);
            if (!measure::check_assumption2(mu, xs, bound_C).pass) return;
            auto jet = measure::jet_at(mu, xs);
            double b_n = xs + t * jet.g0;
            double c2 = std::pow(jet.g2 / 2.0, -1.0 / 3.0) / t;
            ReplicaDiag d;
            MatrixPath path(spec, rng);
            double top = path.advance_to(t, d).back();
            values[r] = c2 * std::pow(static_cast<double>(n), 2.0 / 3.0) * (top - b_n);
        } catch (...) {
            failures[r] = std::current_exception();
        }
    });
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    RandomStartSummary out;
    for (const auto& v : values) {
        if (v)
            out.rescaled.push_back(*v);
        else
            ++out.skipped;
    }
    if (out.rescaled.empty()) throw DomainError("every sampled spectrum was skipped");
    std::sort(out.rescaled.begin(), out.rescaled.end());
    // tabulated Tracy-Widom CDF, linear in between
    const double lo = -8.0, step = 0.05;
    std::vector<double> table;
    for (double s = lo; s <= 6.0 + 1e-12; s += step) table.push_back(fredholm::tracy_widom_cdf(s));
    auto tw = [&](double s) {
        if (s <= lo) return 0.0;
        double pos = (s - lo) / step;
        std::size_t j = static_cast<std::size_t>(pos);
        if (j + 1 >= table.size()) return 1.0;
        double w = pos - j;
        return table[j] + w * (table[j + 1] - table[j]);
    };
    out.ks_to_tracy_widom = ks_distance(out.rescaled, tw);
    return out;
}

}  // namespace nibm::sim
