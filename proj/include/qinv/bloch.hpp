// Single-qubit states: density matrices, Bloch vectors, random states and
// the distance measures used by the quasi-inverse loss.
#pragma once

#include <array>
#include <complex>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace qinv {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Vector3 = Eigen::Vector3d;

/// Default tolerance for density-matrix invariants (Hermiticity, trace, PSD).
inline constexpr double kStateTolerance = 1e-12;

/// Pauli matrices: sigma(0) = I, sigma(1..3) = X, Y, Z.
const Matrix2c &sigma(int index);

/// Bloch vector r of a qubit state rho = (I + r.sigma) / 2.
struct BlochVector {
    Vector3 r = Vector3::Zero();

    BlochVector() = default;
    explicit BlochVector(const Vector3 &v) : r(v) {}
    BlochVector(double r1, double r2, double r3) : r(r1, r2, r3) {}

    double norm() const { return r.norm(); }
    double operator[](int i) const { return r[i]; }
    bool operator==(const BlochVector &other) const { return r == other.r; }
};

/// A 2x2 density matrix.
///
/// The plain constructor stores the matrix as-is; use `checked` when the
/// input must satisfy the state invariants. Maps reconstructed from
/// tomography or produced by a trained network are only approximately
/// physical, so validation is left to the caller there.
class DensityMatrix {
public:
    DensityMatrix() : m_(Matrix2c::Identity() * 0.5) {}
    explicit DensityMatrix(const Matrix2c &m) : m_(m) {}

    /// Throws std::invalid_argument unless `m` is Hermitian, unit-trace and
    /// PSD within `tol`.
    static DensityMatrix checked(const Matrix2c &m, double tol = kStateTolerance);

    const Matrix2c &matrix() const { return m_; }
    Complex operator()(int i, int j) const { return m_(i, j); }

    /// Largest violation across the three invariants: max |rho - rho^dag|
    /// entry, |tr - 1|, and -min(eigenvalue) clamped at zero.
    double invariant_violation() const;
    bool is_valid(double tol = kStateTolerance) const { return invariant_violation() <= tol; }

private:
    Matrix2c m_;
};

/// (I + r.sigma) / 2 without any length check.
Matrix2c matrix_from_bloch(const BlochVector &r);

/// Throws std::invalid_argument when |r| > 1 + 1e-12.
DensityMatrix density_from_bloch(const BlochVector &r);

/// r_i = Re Tr[rho sigma_i].
BlochVector bloch_from_density(const DensityMatrix &rho);

/// Ginibre sample G G^dag / Tr(G G^dag), with G a 2x2 matrix of independent
/// standard-normal real and imaginary parts.
DensityMatrix random_density(std::mt19937_64 &rng);

/// Uniform point in the closed unit ball.
BlochVector random_unit_ball(std::mt19937_64 &rng);

/// Half the Euclidean distance between the two Bloch vectors.
double trace_distance(const DensityMatrix &a, const DensityMatrix &b);

/// Squared modified trace distance: 1/4 |r_pred - scale * r_orig|^2.
double smtd(const BlochVector &r_pred, const BlochVector &r_orig, double scale);

struct SmtdTerm {
    BlochVector predicted;
    BlochVector original;
    double scale;
};

/// Mean of smtd over the terms. Throws std::invalid_argument on empty input.
double msmtd(std::span<const SmtdTerm> terms);

/// Tr[rho^2].
double purity(const DensityMatrix &rho);

}  // namespace qinv
