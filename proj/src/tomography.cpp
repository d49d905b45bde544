#include "qinv/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qinv {

namespace {

Matrix2c ket_projector(Complex a, Complex b) {
    Eigen::Vector2cd ket(a, b);
    return ket * ket.adjoint();
}

}  // namespace

const ProbeBasis &ProbeBasis::standard() {
    static const ProbeBasis basis = [] {
        const double h = 1.0 / std::sqrt(2.0);
        const Complex i(0.0, 1.0);
        return ProbeBasis{{DensityMatrix(ket_projector(1.0, 0.0)),
                           DensityMatrix(ket_projector(0.0, 1.0)),
                           DensityMatrix(ket_projector(h, h)),
                           DensityMatrix(ket_projector(h, i * h))}};
    }();
    return basis;
}

const OperatorBasis &OperatorBasis::pauli() {
    static const OperatorBasis basis{{sigma(0), sigma(1), sigma(2), sigma(3)}};
    return basis;
}

double ChiMatrix::hermiticity_residual() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

double ChiMatrix::min_eigenvalue() const {
    Matrix4c h = 0.5 * (entries + entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix4c> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

ProbeResult probe_map(const QubitMap &map, const ProbeBasis &basis) {
    ProbeResult result{basis.states, 0.0};
    for (std::size_t j = 0; j < 4; ++j) {
        DensityMatrix out = map(basis.states[j]);
        const Matrix2c &m = out.matrix();
        double defect = std::max((m - m.adjoint()).cwiseAbs().maxCoeff(),
                                 std::abs(m.trace() - Complex(1.0, 0.0)));
        if (!(defect <= kProbeTolerance)) {
            throw NumericError("map output for probe " + std::to_string(j) +
                               " is not a unit-trace Hermitian matrix (defect " +
                               std::to_string(defect) + ")");
        }
        result.max_defect = std::max(result.max_defect, defect);
        result.outputs[j] = out;
    }
    return result;
}

LambdaMatrix compute_lambda(const std::array<DensityMatrix, 4> &outputs, const ProbeBasis &basis) {
    LambdaMatrix lambda;
    for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
            lambda.entries(j, k) =
                (outputs[j].matrix().adjoint() * basis.states[k].matrix()).trace();
        }
    }
    return lambda;
}

BetaTensor compute_beta(const OperatorBasis &ops, const ProbeBasis &basis) {
    BetaTensor beta;
    for (int j = 0; j < 4; ++j) {
        const Matrix2c &rho_j = basis.states[j].matrix();
        for (int k = 0; k < 4; ++k) {
            Matrix2c rho_k_dag = basis.states[k].matrix().adjoint();
            for (int m = 0; m < 4; ++m) {
                for (int n = 0; n < 4; ++n) {
                    beta.entries(j * 4 + k, m * 4 + n) =
                        (rho_k_dag * ops.operators[m] * rho_j * ops.operators[n].adjoint()).trace();
                }
            }
        }
    }
    return beta;
}

const BetaTensor &standard_beta() {
    static const BetaTensor beta = compute_beta(OperatorBasis::pauli(), ProbeBasis::standard());
    return beta;
}

ChiSolution solve_chi(const BetaTensor &beta, const LambdaMatrix &lambda) {
    Vector16c rhs;
    for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
            rhs(j * 4 + k) = lambda.entries(j, k);
        }
    }
    Eigen::FullPivLU<Matrix16c> lu(beta.entries);
    if (!lu.isInvertible()) {
        throw NumericError("beta tensor is singular");
    }
    Vector16c x = lu.solve(rhs);

    ChiSolution out;
    out.solve_residual = (beta.entries * x - rhs).cwiseAbs().maxCoeff();
    if (!(out.solve_residual <= kBetaResidualTolerance)) {
        throw NumericError("chi solve residual " + std::to_string(out.solve_residual) +
                           " exceeds tolerance");
    }
    Matrix4c raw;
    for (int m = 0; m < 4; ++m) {
        for (int n = 0; n < 4; ++n) {
            raw(m, n) = x(m * 4 + n);
        }
    }
    out.asymmetry = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
    out.chi.entries = 0.5 * (raw + raw.adjoint());
    return out;
}

ChiEigen eigendecompose_chi(const ChiMatrix &chi) {
    Matrix4c h = 0.5 * (chi.entries + chi.entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix4c> solver(h);
    ChiEigen out;
    // Eigen returns ascending order.
    for (int x = 0; x < 4; ++x) {
        out.values[x] = solver.eigenvalues()(3 - x);
        out.vectors.col(x) = solver.eigenvectors().col(3 - x);
    }
    return out;
}

KrausSet kraus_from_chi(const ChiMatrix &chi, const OperatorBasis &ops) {
    ChiEigen eig = eigendecompose_chi(chi);
    KrausSet k;
    for (int x = 0; x < 4; ++x) {
        double d = eig.values[x];
        if (d < -kChiNegativeTolerance) {
            throw NumericError("chi matrix has eigenvalue " + std::to_string(d) +
                               "; map is not completely positive");
        }
        d = std::max(d, 0.0);
        if (d < kKrausDropThreshold) {
            continue;
        }
        Matrix2c e = Matrix2c::Zero();
        for (int m = 0; m < 4; ++m) {
            e += eig.vectors(m, x) * ops.operators[m];
        }
        k.operators.push_back(std::sqrt(d) * e);
    }
    return k;
}

std::array<Complex, 4> pauli_coefficients(const Matrix2c &e, const OperatorBasis &ops) {
    std::array<Complex, 4> a;
    for (int m = 0; m < 4; ++m) {
        a[m] = 0.5 * (ops.operators[m].adjoint() * e).trace();
    }
    return a;
}

ChiMatrix chi_of_kraus(const KrausSet &k, const OperatorBasis &ops) {
    ChiMatrix chi;
    for (const auto &e : k.operators) {
        auto a = pauli_coefficients(e, ops);
        for (int m = 0; m < 4; ++m) {
            for (int n = 0; n < 4; ++n) {
                chi.entries(m, n) += a[m] * std::conj(a[n]);
            }
        }
    }
    return chi;
}

Matrix2c apply_chi(const ChiMatrix &chi, const Matrix2c &rho, const OperatorBasis &ops) {
    Matrix2c out = Matrix2c::Zero();
    for (int m = 0; m < 4; ++m) {
        for (int n = 0; n < 4; ++n) {
            out += chi(m, n) * ops.operators[m] * rho * ops.operators[n].adjoint();
        }
    }
    return out;
}

CptpReport cptp_check(const KrausSet &k) {
    CptpReport r;
    r.delta_norm = (k.completeness() - Matrix2c::Identity()).cwiseAbs().maxCoeff();
    r.min_chi_eig = chi_of_kraus(k).min_eigenvalue();
    return r;
}

QptResult qpt(const QubitMap &map) {
    QptResult r;
    ProbeResult probes = probe_map(map);
    r.probe_defect = probes.max_defect;
    r.chi = solve_chi(standard_beta(), compute_lambda(probes.outputs));
    r.eigen = eigendecompose_chi(r.chi.chi);
    r.kraus = kraus_from_chi(r.chi.chi);
    r.cptp = cptp_check(r.kraus);
    return r;
}

}  // namespace qinv
