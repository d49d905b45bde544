#include "qinv/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qinv {

namespace {

const std::array<Matrix2c, 4> &pauli_table() {
    static const std::array<Matrix2c, 4> table = [] {
        const Complex i(0.0, 1.0);
        std::array<Matrix2c, 4> t;
        t[0] << 1.0, 0.0, 0.0, 1.0;
        t[1] << 0.0, 1.0, 1.0, 0.0;
        t[2] << 0.0, -i, i, 0.0;
        t[3] << 1.0, 0.0, 0.0, -1.0;
        return t;
    }();
    return table;
}

}  // namespace

const Matrix2c &sigma(int index) {
    if (index < 0 || index > 3) {
        throw std::out_of_range("Pauli index must be in 0..3");
    }
    return pauli_table()[index];
}

DensityMatrix DensityMatrix::checked(const Matrix2c &m, double tol) {
    DensityMatrix rho(m);
    double violation = rho.invariant_violation();
    if (!(violation <= tol)) {
        throw std::invalid_argument("not a density matrix (invariant violation " +
                                    std::to_string(violation) + ")");
    }
    return rho;
}

double DensityMatrix::invariant_violation() const {
    double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    double trace = std::abs(m_.trace() - Complex(1.0, 0.0));
    // Eigenvalues of the Hermitian part; the anti-Hermitian part is already
    // accounted for above.
    Matrix2c h = 0.5 * (m_ + m_.adjoint());
    double a = h(0, 0).real();
    double d = h(1, 1).real();
    double mean = 0.5 * (a + d);
    double radius = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(h(0, 1)));
    double min_eig = mean - radius;
    return std::max({herm, trace, std::max(0.0, -min_eig)});
}

Matrix2c matrix_from_bloch(const BlochVector &r) {
    Matrix2c m = sigma(0);
    for (int i = 0; i < 3; ++i) {
        m += r[i] * sigma(i + 1);
    }
    return 0.5 * m;
}

DensityMatrix density_from_bloch(const BlochVector &r) {
    if (!(r.norm() <= 1.0 + kStateTolerance)) {
        throw std::invalid_argument("Bloch vector longer than 1 is not a state");
    }
    return DensityMatrix(matrix_from_bloch(r));
}

BlochVector bloch_from_density(const DensityMatrix &rho) {
    const Matrix2c &m = rho.matrix();
    // Closed forms of Tr[rho sigma_i].
    double r1 = (m(0, 1) + m(1, 0)).real();
    double r2 = (Complex(0.0, 1.0) * (m(0, 1) - m(1, 0))).real();
    double r3 = (m(0, 0) - m(1, 1)).real();
    return {r1, r2, r3};
}

DensityMatrix random_density(std::mt19937_64 &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix2c g;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            double re = normal(rng);
            double im = normal(rng);
            g(i, j) = Complex(re, im);
        }
    }
    Matrix2c w = g * g.adjoint();
    w /= w.trace().real();
    // Exact Hermiticity; the product is Hermitian only up to rounding.
    w = 0.5 * (w + w.adjoint()).eval();
    return DensityMatrix(w);
}

BlochVector random_unit_ball(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    while (true) {
        Vector3 v(uniform(rng), uniform(rng), uniform(rng));
        if (v.squaredNorm() <= 1.0) {
            return BlochVector(v);
        }
    }
}

double trace_distance(const DensityMatrix &a, const DensityMatrix &b) {
    return 0.5 * (bloch_from_density(a).r - bloch_from_density(b).r).norm();
}

double smtd(const BlochVector &r_pred, const BlochVector &r_orig, double scale) {
    return 0.25 * (r_pred.r - scale * r_orig.r).squaredNorm();
}

double msmtd(std::span<const SmtdTerm> terms) {
    if (terms.empty()) {
        throw std::invalid_argument("msmtd of an empty list");
    }
    double sum = 0.0;
    for (const auto &t : terms) {
        sum += smtd(t.predicted, t.original, t.scale);
    }
    return sum / static_cast<double>(terms.size());
}

double purity(const DensityMatrix &rho) {
    return (rho.matrix() * rho.matrix()).trace().real();
}

}  // namespace qinv
