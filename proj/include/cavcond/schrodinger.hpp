#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cavcond {

/// Uniform periodic grid on the cavity spacer [-L/2, L/2).
///
/// The point z = +L/2 is identified with z = -L/2, so index 0 is the seam
/// where both leads sit.
class Grid {
public:
    static constexpr std::size_t min_points = 64;

    Grid(std::size_t n_points, double length_nm);

    std::size_t size() const noexcept { return n_points_; }
    double length() const noexcept { return length_; }
    double dz() const noexcept { return length_ / static_cast<double>(n_points_); }
    double z(std::size_t k) const noexcept { return -0.5 * length_ + static_cast<double>(k) * dz(); }

    bool operator==(const Grid&) const = default;

private:
    std::size_t n_points_;
    double length_;
};

struct WellSegment {
    double center_nm = 0.0;
    double width_nm = 0.0;
    double depth_meV = 0.0;

    bool operator==(const WellSegment&) const = default;
};

/// Square wells cut into a uniform barrier.
struct StructureSpec {
    std::vector<WellSegment> wells;
    double barrier_meV = 0.0;

    bool operator==(const StructureSpec&) const = default;
};

/// Equally spaced identical wells at the given pitch, centred on the spacer.
StructureSpec periodic_wells(std::size_t count, double pitch_nm, double width_nm, double depth_meV);

struct PotentialProfile {
    Grid grid;
    std::vector<double> values; ///< meV, shifted so that the minimum is 0
    StructureSpec source;
    double shift_meV = 0.0;     ///< amount subtracted from the raw profile

    /// Barrier level on the shifted energy scale.
    double barrier_level() const noexcept { return source.barrier_meV - shift_meV; }
};

/// Samples the structure on the grid.  A cell that straddles a well edge gets
/// the covered fraction of the well depth.
PotentialProfile build_potential(const StructureSpec& spec, const Grid& grid);

/// Potential from explicit samples; shifted so that min = 0.
PotentialProfile potential_from_samples(const Grid& grid, std::vector<double> values);

/// Lowest eigenpairs of the periodic effective-mass Hamiltonian.
struct SubbandBasis {
    Grid grid;
    double m_star = 0.0;
    std::vector<double> energies;      ///< meV, ascending
    Eigen::MatrixXd wavefunctions;     ///< column j is phi_j(z_k), nm^-1/2
    std::vector<double> potential;     ///< V(z_k) used to build the Hamiltonian
    double max_residual = 0.0;         ///< max_j ||H phi_j - E_j phi_j|| / ||phi_j||, meV

    std::size_t size() const noexcept { return energies.size(); }
    std::span<const double> phi(std::size_t j) const {
        return {wavefunctions.col(static_cast<Eigen::Index>(j)).data(), grid.size()};
    }
};

struct SolverOptions {
    /// Eigenvalues closer than this (meV) are treated as one degenerate subspace.
    double degeneracy_tol_meV = 1e-6;
    /// Residual above which the solve is rejected, meV.
    double residual_tol_meV = 1e-8;
};

SubbandBasis solve_subbands(const PotentialProfile& potential, double m_star, std::size_t n_subbands,
                            const SolverOptions& options = {});

/// Applies the periodic finite-difference Hamiltonian to f.
std::vector<double> apply_hamiltonian(std::span<const double> potential, double m_star, double dz,
                                      std::span<const double> f);

/// Second-order central difference with periodic wrap.
std::vector<double> derivative(std::span<const double> f, double dz);

/// Periodic rectangle rule (the trapezoid rule on a ring).
double integrate(std::span<const double> f, double dz);

/// Periodic rectangle rule for the product f*g.
double overlap(std::span<const double> f, std::span<const double> g, double dz);

} // namespace cavcond
