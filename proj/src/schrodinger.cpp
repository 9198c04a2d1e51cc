#include "cavcond/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <lapacke.h>

#include "cavcond/errors.hpp"
#include "cavcond/units.hpp"

namespace cavcond {

Grid::Grid(std::size_t n_points, double length_nm) : n_points_(n_points), length_(length_nm) {
    if (n_points < min_points) {
        throw ConfigError("n_points", "grid needs at least " + std::to_string(min_points) + " points");
    }
    if (!(length_nm > 0.0) || !std::isfinite(length_nm)) {
        throw ConfigError("L_c_nm", "cavity length must be positive and finite");
    }
}

StructureSpec periodic_wells(std::size_t count, double pitch_nm, double width_nm, double depth_meV) {
    StructureSpec spec;
    spec.barrier_meV = depth_meV;
    const double total = static_cast<double>(count) * pitch_nm;
    for (std::size_t k = 0; k < count; ++k) {
        spec.wells.push_back({-0.5 * total + (static_cast<double>(k) + 0.5) * pitch_nm, width_nm, depth_meV});
    }
    return spec;
}

namespace {

void validate(const StructureSpec& spec, const Grid& grid) {
    const double half = 0.5 * grid.length();
    std::vector<WellSegment> sorted = spec.wells;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& w = sorted[i];
        const std::string field = "structure/wells/" + std::to_string(i);
        if (!(w.width_nm > 0.0) || !std::isfinite(w.width_nm)) {
            throw ConfigError(field + "/L_QW_nm", "well width must be positive");
        }
        if (!std::isfinite(w.depth_meV) || !std::isfinite(w.center_nm)) {
            throw ConfigError(field, "non-finite well parameter");
        }
        if (w.center_nm - 0.5 * w.width_nm <= -half || w.center_nm + 0.5 * w.width_nm >= half) {
            throw ConfigError(field, "well extends past the spacer edge");
        }
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const WellSegment& a, const WellSegment& b) { return a.center_nm < b.center_nm; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double prev_hi = sorted[i - 1].center_nm + 0.5 * sorted[i - 1].width_nm;
        const double lo = sorted[i].center_nm - 0.5 * sorted[i].width_nm;
        if (lo < prev_hi) {
            throw ConfigError("structure/wells", "wells overlap");
        }
    }
    if (!std::isfinite(spec.barrier_meV)) {
        throw ConfigError("structure/barrier_meV", "barrier must be finite");
    }
}

} // namespace

PotentialProfile potential_from_samples(const Grid& grid, std::vector<double> values) {
    if (values.size() != grid.size()) {
        throw ConfigError("potential", "sample count does not match the grid");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ConfigError("potential", "non-finite potential sample");
    }
    const double vmin = *std::min_element(values.begin(), values.end());
    for (double& v : values) v -= vmin;
    PotentialProfile out{grid, std::move(values), {}, vmin};
    return out;
}

PotentialProfile build_potential(const StructureSpec& spec, const Grid& grid) {
    validate(spec, grid);
    const double dz = grid.dz();
    std::vector<double> values(grid.size(), spec.barrier_meV);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double lo = grid.z(k) - 0.5 * dz;
        const double hi = grid.z(k) + 0.5 * dz;
        for (const auto& w : spec.wells) {
            const double covered = std::min(hi, w.center_nm + 0.5 * w.width_nm) -
                                   std::max(lo, w.center_nm - 0.5 * w.width_nm);
            if (covered > 0.0) values[k] -= w.depth_meV * std::min(covered / dz, 1.0);
        }
    }
    auto profile = potential_from_samples(grid, std::move(values));
    profile.source = spec;
    return profile;
}

std::vector<double> apply_hamiltonian(std::span<const double> potential, double m_star, double dz,
                                      std::span<const double> f) {
    const std::size_t n = f.size();
    const double t = 0.5 * units::hbar2_over_m(m_star) / (dz * dz);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double left = f[(k + n - 1) % n];
        const double right = f[(k + 1) % n];
        out[k] = (potential[k] + 2.0 * t) * f[k] - t * (left + right);
    }
    return out;
}

namespace {

// Picks a reproducible basis inside a degenerate subspace: eigenvectors of a
// generic position weight restricted to the subspace.
void canonicalize_cluster(Eigen::MatrixXd& vecs, Eigen::Index first, Eigen::Index count, const Grid& grid) {
    if (count < 2) return;
    const Eigen::Index n = vecs.rows();
    Eigen::VectorXd weight(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double s = grid.z(static_cast<std::size_t>(k)) / grid.length();
        weight[k] = s + 0.37 * s * s + 0.11 * std::sin(2.0 * units::pi * s + 0.5);
    }
    Eigen::MatrixXd block = vecs.middleCols(first, count);
    // Modified Gram-Schmidt first so the subspace basis is orthonormal to rounding.
    for (Eigen::Index a = 0; a < count; ++a) {
        for (Eigen::Index b = 0; b < a; ++b) block.col(a) -= block.col(b).dot(block.col(a)) * block.col(b);
        block.col(a).normalize();
    }
    const Eigen::MatrixXd projected = block.transpose() * weight.asDiagonal() * block;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(projected);
    vecs.middleCols(first, count) = block * small.eigenvectors();
}

// Visiting the ring as 0, n-1, 1, n-2, 2, ... puts every nearest-neighbour pair,
// including the seam, within two positions, so the periodic Hamiltonian becomes
// a symmetric band matrix with two off-diagonals.
std::vector<std::size_t> zigzag_order(std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t p = 0; p < n; ++p) order[p] = (p % 2 == 0) ? p / 2 : n - 1 - (p - 1) / 2;
    return order;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> lowest_eigenpairs(std::span<const double> potential, double m_star,
                                                              double dz, Eigen::Index count) {
    const auto n = static_cast<lapack_int>(potential.size());
    const double t = 0.5 * units::hbar2_over_m(m_star) / (dz * dz);
    const auto order = zigzag_order(potential.size());
    std::vector<std::size_t> position(potential.size());
    for (std::size_t p = 0; p < order.size(); ++p) position[order[p]] = p;

    // Lower band storage, column major: ab[(i - j) + j * ldab] = H(i, j) for i >= j.
    constexpr lapack_int kd = 2;
    constexpr lapack_int ldab = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab * n), 0.0);
    auto set = [&](std::size_t a, std::size_t b, double value) {
        std::size_t i = position[a], j = position[b];
        if (i < j) std::swap(i, j);
        ab[(i - j) + j * ldab] += value;
    };
    for (std::size_t k = 0; k < potential.size(); ++k) {
        set(k, k, potential[k] + 2.0 * t);
        set(k, (k + 1) % potential.size(), -t);
    }

    std::vector<double> q(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) * static_cast<std::size_t>(count));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, kd, ab.data(), ldab, q.data(), n, 0.0,
                                           0.0, 1, static_cast<lapack_int>(count), 2.0 * LAPACKE_dlamch('S'), &found,
                                           w.data(), z.data(), n, ifail.data());
    if (info != 0 || found != count) {
        throw NumericalError("banded subband eigensolver failed (info " + std::to_string(info) + ")");
    }

    Eigen::VectorXd vals(count);
    Eigen::MatrixXd vecs(static_cast<Eigen::Index>(n), count);
    for (Eigen::Index c = 0; c < count; ++c) {
        vals[c] = w[static_cast<std::size_t>(c)];
        for (std::size_t p = 0; p < order.size(); ++p) {
            vecs(static_cast<Eigen::Index>(order[p]), c) = z[p + static_cast<std::size_t>(c) * order.size()];
        }
    }
    return {vals, vecs};
}

double potential_span(std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v, double threshold) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v[k]) > threshold) {
            if (v[k] < 0.0) v = -v;
            return;
        }
    }
}

} // namespace

SubbandBasis solve_subbands(const PotentialProfile& potential, double m_star, std::size_t n_subbands,
                            const SolverOptions& options) {
    const Grid& grid = potential.grid;
    const std::size_t n = grid.size();
    if (n_subbands == 0 || n_subbands > n) {
        throw ConfigError("n_subbands", "must be between 1 and n_points");
    }
    if (!(m_star > 0.0)) throw ConfigError("structure/m_star", "effective mass must be positive");

    const double dz = grid.dz();
    const auto ni = static_cast<Eigen::Index>(n);
    const auto m = static_cast<Eigen::Index>(n_subbands);
    // Ask for a few extra levels so a degenerate subspace cut by n_subbands can be canonicalized whole.
    const Eigen::Index requested = std::min<Eigen::Index>(ni, m + 4);
    auto [vals_all, vecs_all] = lowest_eigenpairs(potential.values, m_star, dz, requested);

    Eigen::Index keep = m;
    while (keep < requested && vals_all[keep] - vals_all[m - 1] <= options.degeneracy_tol_meV) ++keep;
    Eigen::MatrixXd vecs = vecs_all.leftCols(keep);
    const Eigen::VectorXd vals = vals_all.head(keep);

    for (Eigen::Index first = 0; first < keep;) {
        Eigen::Index last = first + 1;
        while (last < keep && vals[last] - vals[last - 1] <= options.degeneracy_tol_meV) ++last;
        canonicalize_cluster(vecs, first, last - first, grid);
        first = last;
    }

    SubbandBasis basis{grid, m_star, {}, Eigen::MatrixXd(ni, m), potential.values, 0.0};
    const double scale = 1.0 / std::sqrt(dz);
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXd v = vecs.col(j) * scale;
        fix_sign(v, 1e-6);
        basis.wavefunctions.col(j) = v;
        basis.energies.push_back(vals[j]);
    }

    for (Eigen::Index j = 0; j < m; ++j) {
        const auto phi = basis.phi(static_cast<std::size_t>(j));
        const auto hphi = apply_hamiltonian(potential.values, m_star, dz, phi);
        double res = 0.0, norm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double r = hphi[k] - basis.energies[static_cast<std::size_t>(j)] * phi[k];
            res += r * r;
            norm += phi[k] * phi[k];
        }
        basis.max_residual = std::max(basis.max_residual, std::sqrt(res / norm));
    }
    // Rounding in H*phi alone is of order eps*||H||, which passes 1e-8 meV on fine grids.
    const double t = 0.5 * units::hbar2_over_m(m_star) / (dz * dz);
    const double floor = 256.0 * std::numeric_limits<double>::epsilon() * (4.0 * t + potential_span(potential.values));
    const double tol = std::max(options.residual_tol_meV, floor);
    if (basis.max_residual > tol) {
        std::ostringstream msg;
        msg << "subband residual " << basis.max_residual << " meV exceeds " << tol;
        throw NumericalError(msg.str());
    }
    return basis;
}

std::vector<double> derivative(std::span<const double> f, double dz) {
    const std::size_t n = f.size();
    std::vector<double> out(n);
    const double inv = 0.5 / dz;
    for (std::size_t k = 0; k < n; ++k) out[k] = (f[(k + 1) % n] - f[(k + n - 1) % n]) * inv;
    return out;
}

double integrate(std::span<const double> f, double dz) {
    double sum = 0.0;
    for (double v : f) sum += v;
    return sum * dz;
}

double overlap(std::span<const double> f, std::span<const double> g, double dz) {
    double sum = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) sum += f[k] * g[k];
    return sum * dz;
}

} // namespace cavcond
