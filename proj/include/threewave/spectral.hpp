#ifndef THREEWAVE_SPECTRAL_HPP
#define THREEWAVE_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "threewave/fock.hpp"
#include "threewave/hamiltonian.hpp"

// Eigendecomposition of the tridiagonal Hamiltonian and everything built on
// it: eigenvector weights, the spectral-line decomposition of <n3>(t),
// eigenvalue spacing diagnostics, and recurrence-time estimates.

namespace threewave {

class eigensolver_error : public std::runtime_error {
public:
    eigensolver_error(const std::string& what, int index)
        : std::runtime_error(what + " (eigenvalue index " + std::to_string(index) + ")"),
          index(index) {}
    int index;
};

// Full spectrum of the invariant-subspace Hamiltonian. Eigenvalues ascending;
// vectors[j] is the j-th eigenvector expressed in the psi basis, i.e.
// vectors[j][k] = beta_jk. Sign convention: the largest-magnitude component
// of each eigenvector is positive.
struct EigenSystem {
    SubspaceSpec spec;
    std::vector<double> lambdas;
    std::vector<std::vector<double>> vectors;

    int dimension() const { return static_cast<int>(lambdas.size()); }
    double max_abs_lambda() const {
        double m = 0;
        for (double x : lambdas) m = std::max(m, std::abs(x));
        return m;
    }
    double beta(int j, int k) const { return vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]; }
};

namespace detail {

// Implicit-shift QL for a symmetric tridiagonal matrix, with eigenvector
// accumulation. diag/offdiag are destroyed; z must come in as the identity
// and leaves with eigenvectors in its columns (z[k*n+j] = component k of
// eigenvector j). Deterministic 30-sweep cap per eigenvalue.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                           int n) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (n == 0) return;
    e[static_cast<std::size_t>(n) - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 30)
                    throw eigensolver_error("tridiagonal_ql: no convergence in 30 sweeps", l);
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[static_cast<std::size_t>(k) * n + i + 1];
                        z[static_cast<std::size_t>(k) * n + i + 1] =
                            s * z[static_cast<std::size_t>(k) * n + i] + c * f;
                        z[static_cast<std::size_t>(k) * n + i] =
                            c * z[static_cast<std::size_t>(k) * n + i] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

inline EigenSystem eigensystem(const TridiagonalHamiltonian& H) {
    const int n = H.dimension();
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i + 1 < n; ++i) e[static_cast<std::size_t>(i)] = H.offdiag()[static_cast<std::size_t>(i)];
    std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
    for (int k = 0; k < n; ++k) z[static_cast<std::size_t>(k) * n + k] = 1.0;

    detail::tridiagonal_ql(d, e, z, n);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

    EigenSystem es{H.spec(), std::vector<double>(static_cast<std::size_t>(n)),
                   std::vector<std::vector<double>>(static_cast<std::size_t>(n))};
    for (int j = 0; j < n; ++j) {
        const int src = order[static_cast<std::size_t>(j)];
        es.lambdas[static_cast<std::size_t>(j)] = d[src];
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = z[static_cast<std::size_t>(k) * n + src];
        // fix sign: largest-magnitude component positive
        int imax = 0;
        for (int k = 1; k < n; ++k)
            if (std::abs(v[static_cast<std::size_t>(k)]) > std::abs(v[static_cast<std::size_t>(imax)])) imax = k;
        if (v[static_cast<std::size_t>(imax)] < 0)
            for (double& x : v) x = -x;
        es.vectors[static_cast<std::size_t>(j)] = std::move(v);
    }
    return es;
}

// eps_j = <v_j, psi0>; Parseval: sum |eps_j|^2 = 1.
inline std::vector<complexd> eigen_weights(const WaveFunction& psi0, const EigenSystem& es) {
    if (psi0.dimension() != es.dimension())
        throw std::invalid_argument("eigen_weights: dimension mismatch");
    const int n = es.dimension();
    std::vector<complexd> eps(static_cast<std::size_t>(n), complexd(0, 0));
    for (int j = 0; j < n; ++j) {
        complexd acc(0, 0);
        const auto& v = es.vectors[static_cast<std::size_t>(j)];
        for (int k = 0; k < n; ++k) acc += v[static_cast<std::size_t>(k)] * psi0.amplitudes()[static_cast<std::size_t>(k)];
        eps[static_cast<std::size_t>(j)] = acc;
    }
    return eps;
}

// One term of the <n3>(t) expansion: weight at frequency lambda_i - lambda_j.
struct SpectralLine {
    double freq;
    complexd weight;  // conj(eps_i) eps_j sum_k beta_ik beta_jk k
    int i, j;
};

// All (i, j) pairs with |weight| above prune_rel * max|weight|. prune_rel = 0
// keeps every line, which reconstruct_n3 requires.
inline std::vector<SpectralLine> spectral_lines_n3(const WaveFunction& psi0,
                                                   const EigenSystem& es,
                                                   double prune_rel = 0.0) {
    const std::vector<complexd> eps = eigen_weights(psi0, es);
    const int n = es.dimension();
    // M_ij = sum_k beta_ik beta_jk k
    std::vector<double> M(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto& vi = es.vectors[static_cast<std::size_t>(i)];
        for (int j = i; j < n; ++j) {
            const auto& vj = es.vectors[static_cast<std::size_t>(j)];
            double acc = 0;
            for (int k = 1; k < n; ++k)
                acc += vi[static_cast<std::size_t>(k)] * vj[static_cast<std::size_t>(k)] * static_cast<double>(k);
            M[static_cast<std::size_t>(i) * n + j] = acc;
            M[static_cast<std::size_t>(j) * n + i] = acc;
        }
    }
    std::vector<SpectralLine> lines;
    lines.reserve(static_cast<std::size_t>(n) * n);
    double wmax = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const complexd w = std::conj(eps[static_cast<std::size_t>(i)]) * eps[static_cast<std::size_t>(j)] *
                               M[static_cast<std::size_t>(i) * n + j];
            wmax = std::max(wmax, std::abs(w));
            lines.push_back(SpectralLine{es.lambdas[static_cast<std::size_t>(i)] - es.lambdas[static_cast<std::size_t>(j)], w, i, j});
        }
    if (prune_rel > 0) {
        const double cut = prune_rel * wmax;
        std::erase_if(lines, [cut](const SpectralLine& l) { return std::abs(l.weight) < cut; });
    }
    return lines;
}

// sum over lines of weight * exp(i freq tau). Conjugate pairs cancel the
// imaginary part; the residue is returned for diagnostics.
inline double reconstruct_n3(const std::vector<SpectralLine>& lines, double tau,
                             double* imag_residue = nullptr) {
    complexd acc(0, 0);
    for (const SpectralLine& l : lines)
        acc += l.weight * std::exp(complexd(0.0, l.freq * tau));
    if (imag_residue) *imag_residue = std::abs(acc.imag());
    return acc.real();
}

// Distinct values among |lambda_i - lambda_j| over all pairs, clustered by
// chaining: a gap > tol starts a new frequency.
inline int count_distinct_frequencies(const std::vector<double>& lambdas, double tol) {
    const std::size_t n = lambdas.size();
    if (n == 0) return 0;
    std::vector<double> diffs;
    diffs.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) diffs.push_back(std::abs(lambdas[i] - lambdas[j]));
    std::sort(diffs.begin(), diffs.end());
    int count = 1;
    double last = diffs.front();
    for (double x : diffs) {
        if (x - last > tol) ++count;
        last = x;
    }
    return count;
}

inline int count_distinct_line_frequencies(const std::vector<SpectralLine>& lines, double tol) {
    if (lines.empty()) return 0;
    std::vector<double> freqs;
    freqs.reserve(lines.size());
    for (const SpectralLine& l : lines) freqs.push_back(std::abs(l.freq));
    std::sort(freqs.begin(), freqs.end());
    int count = 1;
    double last = freqs.front();
    for (double x : freqs) {
        if (x - last > tol) ++count;
        last = x;
    }
    return count;
}

// Number of distinct frequencies a d-dimensional +/- symmetric spectrum can
// generate when the nonzero magnitudes are otherwise generic: Floor(d^2/4)+1.
inline long long generic_frequency_count(int d) {
    return static_cast<long long>(d) * d / 4 + 1;
}

struct SpacingReport {
    double base;               // best-fit progression lambda_k ~ k * base
    double max_rel_deviation;  // relative to the fitted k * base
    bool linear;               // max_rel_deviation < 1e-3
    int n_positive;
};

inline SpacingReport spacing_diagnostic(const EigenSystem& es) {
    if (es.dimension() < 3)
        throw std::domain_error("spacing_diagnostic: needs dimension >= 3");
    const double zero_cut = 1e-9 * es.max_abs_lambda();
    std::vector<double> pos;
    for (double x : es.lambdas)
        if (x > zero_cut) pos.push_back(x);
    std::sort(pos.begin(), pos.end());
    double skk = 0, skx = 0;
    for (std::size_t k = 0; k < pos.size(); ++k) {
        const double kk = static_cast<double>(k + 1);
        skk += kk * kk;
        skx += kk * pos[k];
    }
    const double base = skk > 0 ? skx / skk : 0.0;
    double dev = 0;
    for (std::size_t k = 0; k < pos.size(); ++k) {
        const double fit = static_cast<double>(k + 1) * base;
        dev = std::max(dev, std::abs(pos[k] - fit) / fit);
    }
    return SpacingReport{base, dev, dev < 1e-3, static_cast<int>(pos.size())};
}

struct RecurrenceResult {
    bool found = false;
    double tau = 0;
    double fidelity = 0;
    bool degenerate = false;  // fidelity never left the threshold band
};

namespace detail {

inline double fidelity_at(const std::vector<double>& p, const std::vector<double>& lambdas,
                          double tau) {
    complexd acc(0, 0);
    for (std::size_t j = 0; j < p.size(); ++j)
        acc += p[j] * std::exp(complexd(0.0, -lambdas[j] * tau));
    return std::norm(acc);
}

}  // namespace detail

// Smallest tau > 0 with |<Psi(0), Psi(tau)>|^2 >= threshold after the
// fidelity has first dropped below it, located on a Nyquist-safe grid and
// refined by golden-section maximization. A state that never departs
// (eigenvector) reports the first grid point, flagged degenerate.
inline RecurrenceResult recurrence_time(const EigenSystem& es, const WaveFunction& psi0,
                                        double horizon, double threshold) {
    if (!(horizon > 0)) throw std::domain_error("recurrence_time: horizon must be positive");
    if (!(threshold > 0 && threshold < 1))
        throw std::domain_error("recurrence_time: threshold must lie in (0, 1)");
    const std::vector<complexd> eps = eigen_weights(psi0, es);
    std::vector<double> p(eps.size());
    for (std::size_t j = 0; j < eps.size(); ++j) p[j] = std::norm(eps[j]);

    const double lmax = es.max_abs_lambda();
    const double dtau = lmax > 0 ? (2.0 * std::numbers::pi / lmax) / 20.0 : horizon / 1000.0;
    bool departed = false;
    double prev_tau = 0.0;
    for (double tau = dtau; tau <= horizon; tau += dtau) {
        const double f = detail::fidelity_at(p, es.lambdas, tau);
        if (!departed) {
            if (f < threshold) departed = true;
        } else if (f >= threshold) {
            // walk up the grid to the local top, then refine around it
            double peak = tau, fpeak = f;
            for (double t2 = tau + dtau; t2 <= horizon; t2 += dtau) {
                const double f2 = detail::fidelity_at(p, es.lambdas, t2);
                if (f2 < fpeak) break;
                peak = t2;
                fpeak = f2;
            }
            double a = std::max(prev_tau, peak - dtau), b = std::min(peak + dtau, horizon);
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = detail::fidelity_at(p, es.lambdas, x1);
            double f2 = detail::fidelity_at(p, es.lambdas, x2);
            for (int it = 0; it < 80 && (b - a) > 1e-14 * std::max(1.0, b); ++it) {
                if (f1 < f2) {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = detail::fidelity_at(p, es.lambdas, x2);
                } else {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = detail::fidelity_at(p, es.lambdas, x1);
                }
            }
            const double tstar = 0.5 * (a + b);
            return RecurrenceResult{true, tstar, detail::fidelity_at(p, es.lambdas, tstar), false};
        }
        prev_tau = tau;
    }
    if (!departed)
        return RecurrenceResult{true, dtau, detail::fidelity_at(p, es.lambdas, dtau), true};
    return RecurrenceResult{};
}

inline RecurrenceResult recurrence_time(const TridiagonalHamiltonian& H, const WaveFunction& psi0,
                                        double horizon, double threshold) {
    return recurrence_time(eigensystem(H), psi0, horizon, threshold);
}

}  // namespace threewave

#endif  // THREEWAVE_SPECTRAL_HPP
