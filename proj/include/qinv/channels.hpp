// Single-qubit noise channels in Kraus form and their affine Bloch action.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qinv/bloch.hpp"

namespace qinv {

using Matrix3 = Eigen::Matrix3d;

/// Completeness tolerance ||sum E^dag E - I||_F for a KrausSet.
inline constexpr double kCompletenessTolerance = 1e-10;

enum class ChannelKind { BitFlip, PhaseFlip, BitPhaseFlip, AmplitudeDamping };

std::string_view channel_name(ChannelKind kind);
/// Accepts "bit_flip", "phase_flip", "bit_phase_flip", "amplitude_damping".
/// Throws std::invalid_argument otherwise.
ChannelKind parse_channel_kind(std::string_view name);

/// Pauli index (1, 2, 3) applied by a flip channel; 0 for amplitude damping.
int flip_pauli_index(ChannelKind kind);

struct ChannelParams {
    ChannelKind kind = ChannelKind::BitFlip;
    double noise = 0.0;  // p for the flip channels, gamma for damping
};

struct KrausSet {
    std::vector<Matrix2c> operators;

    /// sum_i E_i^dag E_i.
    Matrix2c completeness() const;
    /// Frobenius norm of completeness() - I.
    double completeness_residual() const;
};

/// Bloch-picture form r -> M r + c of a qubit map.
struct AffineBlochMap {
    Matrix3 linear = Matrix3::Identity();
    Vector3 shift = Vector3::Zero();

    BlochVector apply(const BlochVector &r) const { return BlochVector(linear * r.r + shift); }
};

// Each constructor rejects noise outside [0, 1] with std::invalid_argument.
KrausSet bit_flip(double p);
KrausSet phase_flip(double p);
KrausSet bit_phase_flip(double p);
KrausSet amplitude_damping(double gamma);
KrausSet make_channel(const ChannelParams &params);

struct ChannelDiagnostics {
    double completeness_residual = 0.0;
    bool complete = true;
};

/// sum_i E_i rho E_i^dag. The Kraus set is not rejected when incomplete;
/// the residual is reported through `diagnostics` instead.
DensityMatrix apply_channel(const KrausSet &k, const DensityMatrix &rho,
                            ChannelDiagnostics *diagnostics = nullptr);

/// Exact affine Bloch action, obtained by probing with I/2 and (I + sigma_i)/2.
AffineBlochMap bloch_affine_of_channel(const KrausSet &k);

/// Baseline quasi-inverse: identity, except sigma_k for a flip channel with
/// p > 1/2.
KrausSet analytical_quasi_inverse(const ChannelParams &params);

}  // namespace qinv
