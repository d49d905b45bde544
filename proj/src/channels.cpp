#include "qinv/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace qinv {

namespace {

void require_probability(double x, const char *what) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
    }
}

// (1 - p) rho + p P rho P, with zero-weight terms omitted.
KrausSet pauli_flip(int pauli, double p) {
    require_probability(p, "flip probability");
    KrausSet k;
    if (p < 1.0) {
        k.operators.push_back(std::sqrt(1.0 - p) * sigma(0));
    }
    if (p > 0.0) {
        k.operators.push_back(std::sqrt(p) * sigma(pauli));
    }
    return k;
}

}  // namespace

std::string_view channel_name(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::BitFlip:
            return "bit_flip";
        case ChannelKind::PhaseFlip:
            return "phase_flip";
        case ChannelKind::BitPhaseFlip:
            return "bit_phase_flip";
        case ChannelKind::AmplitudeDamping:
            return "amplitude_damping";
    }
    return "unknown";
}

ChannelKind parse_channel_kind(std::string_view name) {
    for (auto kind : {ChannelKind::BitFlip, ChannelKind::PhaseFlip, ChannelKind::BitPhaseFlip,
                      ChannelKind::AmplitudeDamping}) {
        if (channel_name(kind) == name) {
            return kind;
        }
    }
    throw std::invalid_argument("unknown channel kind '" + std::string(name) + "'");
}

int flip_pauli_index(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::BitFlip:
            return 1;
        case ChannelKind::BitPhaseFlip:
            return 2;
        case ChannelKind::PhaseFlip:
            return 3;
        case ChannelKind::AmplitudeDamping:
            return 0;
    }
    return 0;
}

Matrix2c KrausSet::completeness() const {
    Matrix2c sum = Matrix2c::Zero();
    for (const auto &e : operators) {
        sum += e.adjoint() * e;
    }
    return sum;
}

double KrausSet::completeness_residual() const {
    return (completeness() - Matrix2c::Identity()).norm();
}

KrausSet bit_flip(double p) { return pauli_flip(1, p); }
KrausSet phase_flip(double p) { return pauli_flip(3, p); }
KrausSet bit_phase_flip(double p) { return pauli_flip(2, p); }

KrausSet amplitude_damping(double gamma) {
    require_probability(gamma, "damping parameter");
    Matrix2c e0;
    e0 << 1.0, 0.0, 0.0, std::sqrt(1.0 - gamma);
    Matrix2c e1;
    e1 << 0.0, std::sqrt(gamma), 0.0, 0.0;
    return KrausSet{{e0, e1}};
}

KrausSet make_channel(const ChannelParams &params) {
    switch (params.kind) {
        case ChannelKind::BitFlip:
            return bit_flip(params.noise);
        case ChannelKind::PhaseFlip:
            return phase_flip(params.noise);
        case ChannelKind::BitPhaseFlip:
            return bit_phase_flip(params.noise);
        case ChannelKind::AmplitudeDamping:
            return amplitude_damping(params.noise);
    }
    throw std::invalid_argument("unknown channel kind");
}

DensityMatrix apply_channel(const KrausSet &k, const DensityMatrix &rho,
                            ChannelDiagnostics *diagnostics) {
    Matrix2c out = Matrix2c::Zero();
    for (const auto &e : k.operators) {
        out += e * rho.matrix() * e.adjoint();
    }
    if (diagnostics != nullptr) {
        diagnostics->completeness_residual = k.completeness_residual();
        diagnostics->complete = diagnostics->completeness_residual <= kCompletenessTolerance;
    }
    return DensityMatrix(out);
}

AffineBlochMap bloch_affine_of_channel(const KrausSet &k) {
    AffineBlochMap map;
    map.shift = bloch_from_density(apply_channel(k, DensityMatrix())).r;
    for (int i = 0; i < 3; ++i) {
        BlochVector axis;
        axis.r[i] = 1.0;
        Vector3 image = bloch_from_density(apply_channel(k, density_from_bloch(axis))).r;
        map.linear.col(i) = image - map.shift;
    }
    return map;
}

KrausSet analytical_quasi_inverse(const ChannelParams &params) {
    require_probability(params.noise, "noise");
    int pauli = flip_pauli_index(params.kind);
    if (pauli != 0 && params.noise > 0.5) {
        return KrausSet{{sigma(pauli)}};
    }
    return KrausSet{{sigma(0)}};
}

}  // namespace qinv
