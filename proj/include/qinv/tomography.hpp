// Quantum process tomography of single-qubit maps in the Pauli operator
// basis: probe states -> lambda, beta -> chi -> Kraus operators.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "qinv/bloch.hpp"
#include "qinv/channels.hpp"
#include "qinv/errors.hpp"

namespace qinv {

using Matrix4c = Eigen::Matrix4cd;
using Matrix16c = Eigen::Matrix<Complex, 16, 16>;
using Vector16c = Eigen::Matrix<Complex, 16, 1>;

using QubitMap = std::function<DensityMatrix(const DensityMatrix &)>;

/// Probe outputs must be Hermitian and unit-trace within this tolerance.
inline constexpr double kProbeTolerance = 1e-8;
/// Chi eigenvalues in [-kChiNegativeTolerance, 0) are treated as zero.
inline constexpr double kChiNegativeTolerance = 1e-6;
/// Eigen-directions below this weight yield no Kraus operator.
inline constexpr double kKrausDropThreshold = 1e-10;
/// Largest accepted residual of the beta solve.
inline constexpr double kBetaResidualTolerance = 1e-8;

/// |0><0|, |1><1|, |+><+|, and |-><-| with |-> = (|0> + i|1>)/sqrt(2).
struct ProbeBasis {
    std::array<DensityMatrix, 4> states;
    static const ProbeBasis &standard();
};

/// (I, sigma1, sigma2, sigma3).
struct OperatorBasis {
    std::array<Matrix2c, 4> operators;
    static const OperatorBasis &pauli();
};

/// chi_mn in E(rho) = sum_mn chi_mn E_m rho E_n^dag.
struct ChiMatrix {
    Matrix4c entries = Matrix4c::Zero();

    Complex operator()(int m, int n) const { return entries(m, n); }
    double hermiticity_residual() const;
    /// Smallest eigenvalue of the Hermitian part.
    double min_eigenvalue() const;
};

/// lambda_jk = tr(E(rho_j)^dag rho_k).
struct LambdaMatrix {
    Matrix4c entries = Matrix4c::Zero();
};

/// beta[(j,k), (m,n)] = tr(rho_k^dag E_m rho_j E_n^dag), row j*4+k, column m*4+n.
struct BetaTensor {
    Matrix16c entries = Matrix16c::Zero();
};

struct ProbeResult {
    std::array<DensityMatrix, 4> outputs;
    /// Largest Hermiticity / trace defect seen among the outputs.
    double max_defect = 0.0;
};

/// Feeds each probe state to the map. Throws NumericError when an output is
/// not Hermitian or not unit-trace within kProbeTolerance.
ProbeResult probe_map(const QubitMap &map, const ProbeBasis &basis = ProbeBasis::standard());

LambdaMatrix compute_lambda(const std::array<DensityMatrix, 4> &outputs,
                            const ProbeBasis &basis = ProbeBasis::standard());

BetaTensor compute_beta(const OperatorBasis &ops, const ProbeBasis &basis);
/// Beta for the standard bases, built once.
const BetaTensor &standard_beta();

struct ChiSolution {
    ChiMatrix chi;  // Hermitized
    double asymmetry = 0.0;
    double solve_residual = 0.0;
};

/// Solves beta chi = lambda. Throws NumericError on large residuals.
ChiSolution solve_chi(const BetaTensor &beta, const LambdaMatrix &lambda);

struct ChiEigen {
    std::array<double, 4> values;  // descending
    Matrix4c vectors;              // column x belongs to values[x]
};

ChiEigen eigendecompose_chi(const ChiMatrix &chi);

/// E_x = sqrt(d_x) sum_m U_mx E_m. Throws NumericError when chi has an
/// eigenvalue below -kChiNegativeTolerance.
KrausSet kraus_from_chi(const ChiMatrix &chi, const OperatorBasis &ops = OperatorBasis::pauli());

/// chi_mn = sum_i e_im conj(e_in), e_im = tr(E_m^dag E_i) / 2.
ChiMatrix chi_of_kraus(const KrausSet &k, const OperatorBasis &ops = OperatorBasis::pauli());

/// The map rho -> sum_mn chi_mn E_m rho E_n^dag, applied to an arbitrary matrix.
Matrix2c apply_chi(const ChiMatrix &chi, const Matrix2c &rho,
                   const OperatorBasis &ops = OperatorBasis::pauli());

/// Coefficients a_m of E = sum_m a_m E_m.
std::array<Complex, 4> pauli_coefficients(const Matrix2c &e,
                                          const OperatorBasis &ops = OperatorBasis::pauli());

struct CptpReport {
    double delta_norm = 0.0;   // max entry of |sum E^dag E - I|
    double min_chi_eig = 0.0;
};

CptpReport cptp_check(const KrausSet &k);

struct QptResult {
    ChiSolution chi;
    ChiEigen eigen;
    KrausSet kraus;
    CptpReport cptp;
    double probe_defect = 0.0;
};

/// probe -> lambda -> chi -> eigendecomposition -> Kraus -> CPTP check.
QptResult qpt(const QubitMap &map);

}  // namespace qinv
