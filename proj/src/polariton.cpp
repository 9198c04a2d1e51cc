#include "cavcond/polariton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "cavcond/errors.hpp"

namespace cavcond {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

// Bogoliubov metric diag(1, 1..1, -1, -1..-1) applied to a vector.
Eigen::VectorXcd apply_metric(const Eigen::VectorXcd& v) {
    const Eigen::Index half = v.size() / 2;
    Eigen::VectorXcd out = v;
    out.tail(half) *= -1.0;
    return out;
}

// Rotate so the largest-magnitude coefficient is real and positive.
void fix_phase(Eigen::VectorXcd& v) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        // Ties broken towards the lower index so the choice is reproducible.
        const double a = std::abs(v[k]);
        if (a > best_abs * (1.0 + 1e-12)) {
            best_abs = a;
            best = k;
        }
    }
    if (best_abs > 0.0) v *= std::conj(v[best]) / best_abs;
}

PolaritonBranch make_branch(double hw, Eigen::VectorXcd v) {
    fix_phase(v);
    const Eigen::Index n = v.size() / 2 - 1;
    PolaritonBranch b;
    b.hw_meV = hw;
    b.w = v[0];
    b.x = v.segment(1, n);
    b.y = v[n + 1];
    b.z = v.segment(n + 2, n);
    b.W_e = electronic_weight(b);
    return b;
}

// General complex eigendecomposition (right vectors, unit 2-norm columns).
void general_eigen(const Eigen::MatrixXcd& m, Eigen::VectorXcd& values, Eigen::MatrixXcd& vectors) {
    const auto n = static_cast<lapack_int>(m.rows());
    Eigen::MatrixXcd a = m;
    values.resize(n);
    vectors.resize(n, n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, values.data(), nullptr, 1,
                                          vectors.data(), n);
    if (info != 0) throw NumericalError("zgeev failed with info = " + std::to_string(info));
}

} // namespace

HopfieldMatrix build_matrix(double hw_c, const Eigen::VectorXd& hw, const Eigen::VectorXd& rabi,
                            const Eigen::MatrixXd& depolarization) {
    if (!(hw_c >= 0.0)) throw ConfigError("omega_c", "cavity frequency must be non-negative");
    const Eigen::Index n = hw.size();
    if (rabi.size() != n || depolarization.rows() != n || depolarization.cols() != n) {
        throw ConfigError("catalog", "inconsistent transition data for the Hopfield matrix");
    }
    const Eigen::RowVectorXcd O = (I * rabi.cast<cd>()).transpose();
    const Eigen::VectorXcd Od = O.adjoint();
    const Eigen::MatrixXcd D = (2.0 * depolarization).cast<cd>();
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(n, n);
    W.diagonal() = hw.cast<cd>();

    const Eigen::Index y0 = n + 1, z0 = n + 2;
    HopfieldMatrix out;
    out.hw_c = hw_c;
    out.m = Eigen::MatrixXcd::Zero(2 * n + 2, 2 * n + 2);
    auto& M = out.m;

    M(0, 0) = hw_c;
    M.block(0, 1, 1, n) = -O;
    M.block(0, z0, 1, n) = O;

    M.block(1, 0, n, 1) = -Od;
    M.block(1, 1, n, n) = W + D;
    M.block(1, y0, n, 1) = -Od;
    M.block(1, z0, n, n) = -D;

    M.block(y0, 1, 1, n) = O;
    M(y0, y0) = -hw_c;
    M.block(y0, z0, 1, n) = -O;

    M.block(z0, 0, n, 1) = -Od;
    M.block(z0, 1, n, n) = D;
    M.block(z0, y0, n, 1) = -Od;
    M.block(z0, z0, n, n) = -W - D;
    return out;
}

HopfieldMatrix build_matrix(const TransitionCatalog& catalog, double hw_c) {
    const auto n = static_cast<Eigen::Index>(catalog.size());
    Eigen::VectorXd hw(n), rabi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        hw[i] = catalog[static_cast<std::size_t>(i)].hw_meV;
        rabi[i] = catalog.rabi(static_cast<std::size_t>(i), hw_c);
    }
    return build_matrix(hw_c, hw, rabi, catalog.depolarization());
}

double electronic_weight(const PolaritonBranch& branch) { return branch.x.squaredNorm() - branch.z.squaredNorm(); }

PolaritonSpectrum diagonalize(const HopfieldMatrix& matrix) {
    const auto& M = matrix.m;
    if (!M.allFinite()) throw NumericalError("Hopfield matrix has non-finite entries");
    const Eigen::Index dim = M.rows();
    const std::size_t expected = matrix.transitions() + 1;

    Eigen::VectorXcd lambda;
    Eigen::MatrixXcd vectors;
    general_eigen(M, lambda, vectors);

    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    const double cluster_tol = 1e-9 * scale;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (lambda[a].real() != lambda[b].real()) return lambda[a].real() < lambda[b].real();
        return a < b;
    });

    PolaritonSpectrum out;
    out.hw_c = matrix.hw_c;
    out.max_imag_ratio = 0.0;
    out.min_norm_ratio = 1.0;
    double worst_imag = 0.0;
    double worst_imag_re = 0.0;

    for (std::size_t first = 0; first < order.size();) {
        std::size_t last = first + 1;
        while (last < order.size() && std::abs(lambda[order[last]] - lambda[order[last - 1]]) <= cluster_tol) ++last;
        const auto k = static_cast<Eigen::Index>(last - first);
        Eigen::MatrixXcd V(dim, k);
        for (Eigen::Index c = 0; c < k; ++c) V.col(c) = vectors.col(order[first + static_cast<std::size_t>(c)]);

        // Metric Gram matrix of the (possibly degenerate) eigenspace.
        Eigen::MatrixXcd gram(k, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) gram(a, b) = V.col(a).dot(apply_metric(V.col(b)));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gs(0.5 * (gram + gram.adjoint()));

        cd mean{0.0, 0.0};
        for (std::size_t c = first; c < last; ++c) mean += lambda[order[c]];
        mean /= static_cast<double>(k);

        for (Eigen::Index c = 0; c < k; ++c) {
            const double g = gs.eigenvalues()[c];
            Eigen::VectorXcd v = V * gs.eigenvectors().col(c);
            const double vn = v.squaredNorm();
            if (!(g > 1e-12 * vn)) continue;
            out.min_norm_ratio = std::min(out.min_norm_ratio, g / vn);
            v /= std::sqrt(g);
            const double imag_ratio = std::abs(mean.imag()) / std::max(std::abs(mean.real()), 1e-300);
            if (std::abs(mean.imag()) > 1e-12 * scale) {
                out.max_imag_ratio = std::max(out.max_imag_ratio, imag_ratio);
                if (std::abs(mean.imag()) > worst_imag) {
                    worst_imag = std::abs(mean.imag());
                    worst_imag_re = mean.real();
                }
            }
            // Rayleigh quotient with the Hermitian form eta*M: real and stationary.
            const double hw = apply_metric(v).dot(M * v).real();
            out.branches.push_back(make_branch(hw, std::move(v)));
        }
        first = last;
    }

    std::ostringstream diag;
    if (out.max_imag_ratio > 1e-6) {
        diag << "complex polariton frequency at hw_c = " << matrix.hw_c << " meV: Re = " << worst_imag_re
             << " meV, Im = " << worst_imag << " meV (over-critical coupling)";
        throw UnstableSpectrumError(diag.str());
    }
    if (out.branches.size() != expected) {
        diag << "found " << out.branches.size() << " positive-norm branches, expected " << expected << " at hw_c = "
             << matrix.hw_c << " meV (unstable or defective Hopfield matrix)";
        throw UnstableSpectrumError(diag.str());
    }
    for (const auto& b : out.branches) {
        if (b.hw_meV < -cluster_tol) {
            diag << "positive-norm branch with negative frequency " << b.hw_meV << " meV at hw_c = " << matrix.hw_c
                 << " meV (unstable ground state)";
            throw UnstableSpectrumError(diag.str());
        }
    }
    std::stable_sort(out.branches.begin(), out.branches.end(),
                     [](const PolaritonBranch& a, const PolaritonBranch& b) { return a.hw_meV < b.hw_meV; });
    return out;
}

double scattering_time(double W_e, double tau0_ps, double tau_p_ps) {
    if (!(tau0_ps > 0.0)) throw ConfigError("tau0_ps", "scattering time must be positive");
    if (!(tau_p_ps > 0.0)) throw ConfigError("tau_p_ps", "photon lifetime must be positive");
    const double we = std::clamp(W_e, 0.0, 1.0);
    const double rate = we / tau0_ps + (std::isinf(tau_p_ps) ? 0.0 : (1.0 - we) / tau_p_ps);
    return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

void assign_scattering_times(PolaritonSpectrum& spectrum, double tau0_ps, double tau_p_ps) {
    for (auto& b : spectrum.branches) b.tau_ps = scattering_time(b.W_e, tau0_ps, tau_p_ps);
}

PolaritonSpectrum solve_polaritons(const TransitionCatalog& catalog, double hw_c, double tau0_ps, double tau_p_ps) {
    auto spectrum = diagonalize(build_matrix(catalog, hw_c));
    assign_scattering_times(spectrum, tau0_ps, tau_p_ps);
    return spectrum;
}

double SingleTransition::rabi(double hw_c) const {
    if (!(hw_c >= 0.0)) throw ConfigError("omega_c", "cavity frequency must be non-negative");
    return rabi_res_meV * std::sqrt(hw_c / hw_meV);
}

double SingleTransition::shifted() const { return std::sqrt(hw_meV * (hw_meV + 4.0 * xi_meV)); }

SingleTransition single_transition(const TransitionCatalog& catalog, std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    return {catalog[i].hw_meV, catalog.depolarization()(k, k), catalog.rabi(i, catalog[i].hw_meV)};
}

PolaritonSpectrum two_subband_solve(const SingleTransition& t, double hw_c) {
    const double w = t.hw_meV;
    const double wc = hw_c;
    const double om = t.rabi(hw_c);
    const double wt2 = w * (w + 4.0 * t.xi_meV);
    if (!(wt2 > 0.0)) throw UnstableSpectrumError("depolarization-shifted transition energy is not real");

    // (l^2 - wc^2)(l^2 - wt^2) = 4 Omega^2 wc w
    const double coupling = 4.0 * om * om * wc * w;
    const double sum = wc * wc + wt2;
    const double disc = std::sqrt((wc * wc - wt2) * (wc * wc - wt2) + 4.0 * coupling);
    const double upper2 = 0.5 * (sum + disc);
    const double lower2 = upper2 > 0.0 ? (wc * wc * wt2 - coupling) / upper2 : 0.0;
    if (lower2 < 0.0) {
        std::ostringstream diag;
        diag << "two-subband lower polariton frequency is imaginary at hw_c = " << hw_c << " meV";
        throw UnstableSpectrumError(diag.str());
    }

    // Real-form components s = w+y, d = w-y, p = x'+z', q = x'-z' with x = i x', z = i z'.
    auto branch = [&](double lam, bool photon_like_decoupled) {
        double s, d, p, q;
        if (om == 0.0) {
            if (photon_like_decoupled) {
                s = d = 1.0;
                p = q = 0.0;
            } else {
                s = d = 0.0;
                q = 1.0;
                p = lam / w;
            }
        } else {
            // Two exact null-vector forms; each degenerates in one decoupled limit.
            const double a2 = lam * lam - wc * wc;
            const double b2 = lam * lam - wt2;
            const Eigen::Vector4d v1(2.0 * om * wc * w, 2.0 * om * lam * w, lam * a2, w * a2);
            const Eigen::Vector4d v2(wc * b2, lam * b2, 2.0 * om * lam * wc, 2.0 * om * w * wc);
            const Eigen::Vector4d& v = v1.norm() >= v2.norm() ? v1 : v2;
            s = v[0];
            d = v[1];
            p = v[2];
            q = v[3];
        }
        const double norm = s * d + p * q;
        if (!(norm > 0.0)) throw UnstableSpectrumError("two-subband branch with non-positive Bogoliubov norm");
        const double f = 1.0 / std::sqrt(norm);
        Eigen::VectorXcd v(4);
        v << cd(0.5 * (s + d) * f), I * (0.5 * (p + q) * f), cd(0.5 * (s - d) * f), I * (0.5 * (p - q) * f);
        return make_branch(lam, std::move(v));
    };

    PolaritonSpectrum out;
    out.hw_c = hw_c;
    const double lo = std::sqrt(lower2), hi = std::sqrt(upper2);
    // With Omega = 0 the photon sits at wc; decide which root it is.
    const bool photon_low = wc * wc <= wt2;
    out.branches.push_back(branch(lo, photon_low));
    out.branches.push_back(branch(hi, !photon_low));
    return out;
}

std::vector<std::size_t> match_branches(const PolaritonSpectrum& previous, const PolaritonSpectrum& next) {
    const std::size_t n = previous.size();
    if (next.size() != n) throw ConfigError("branches", "spectra have different branch counts");
    auto flat = [](const PolaritonBranch& b) {
        Eigen::VectorXcd v(2 * b.x.size() + 2);
        v << b.w, b.x, b.y, b.z;
        return v;
    };
    std::vector<Eigen::VectorXcd> a, b;
    for (const auto& br : previous.branches) a.push_back(flat(br));
    for (const auto& br : next.branches) b.push_back(flat(br));

    struct Pair {
        double overlap;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            pairs.push_back({std::abs(a[i].dot(b[j])) / (a[i].norm() * b[j].norm()), i, j});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& l, const Pair& r) { return l.overlap > r.overlap; });
    std::vector<std::size_t> perm(n, n);
    std::vector<bool> used(n, false);
    for (const auto& p : pairs) {
        if (perm[p.i] != n || used[p.j]) continue;
        perm[p.i] = p.j;
        used[p.j] = true;
    }
    return perm;
}

} // namespace cavcond
