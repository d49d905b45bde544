#include "qinv/channels.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"

using namespace qinv;

namespace {

const std::vector<ChannelKind> kAllKinds = {ChannelKind::BitFlip, ChannelKind::PhaseFlip,
                                            ChannelKind::BitPhaseFlip,
                                            ChannelKind::AmplitudeDamping};
const std::vector<double> kNoiseGrid = {0.0, 0.01, 0.05, 0.1, 0.5, 1.0};

std::size_t nonzero_count(const KrausSet &k) {
    std::size_t n = 0;
    for (const auto &e : k.operators) {
        n += e.norm() > 0.0 ? 1 : 0;
    }
    return n;
}

BlochVector through(const KrausSet &k, const BlochVector &r) {
    return bloch_from_density(apply_channel(k, density_from_bloch(r)));
}

// Fit (M, c) from the images of four affinely independent pure states by
// solving [r_j^T 1] X = image_j^T directly.
AffineBlochMap fit_affine_from_probes(const KrausSet &k) {
    std::vector<BlochVector> probes = {{0, 0, 1}, {0, 0, -1}, {1, 0, 0}, {0, 1, 0}};
    Eigen::Matrix4d design;
    Eigen::Matrix<double, 4, 3> images;
    for (int j = 0; j < 4; ++j) {
        design.row(j) << probes[j].r.transpose(), 1.0;
        images.row(j) = through(k, probes[j]).r.transpose();
    }
    Eigen::Matrix<double, 4, 3> x = design.fullPivLu().solve(images);
    AffineBlochMap map;
    map.linear = x.topRows<3>().transpose();
    map.shift = x.row(3).transpose();
    return map;
}

}  // namespace

TEST(channels, parse_channel_kind) {
    EXPECT_EQ(parse_channel_kind("bit_flip"), ChannelKind::BitFlip);
    EXPECT_EQ(parse_channel_kind("amplitude_damping"), ChannelKind::AmplitudeDamping);
    EXPECT_THROW(parse_channel_kind("depolarizing"), std::invalid_argument);
    for (auto kind : kAllKinds) {
        EXPECT_EQ(parse_channel_kind(channel_name(kind)), kind);
    }
}

TEST(channels, bit_flip_limits) {
    KrausSet noiseless = bit_flip(0.0);
    ASSERT_EQ(nonzero_count(noiseless), 1u);
    EXPECT_EQ(noiseless.operators[0], sigma(0));

    KrausSet full = bit_flip(1.0);
    ASSERT_EQ(nonzero_count(full), 1u);
    EXPECT_EQ(full.operators[0], sigma(1));

    BlochVector out = through(bit_flip(0.5), {0, 1, 0});
    EXPECT_LE(out.r.norm(), 1e-15);
}

TEST(channels, phase_and_bit_phase_flip) {
    EXPECT_EQ(phase_flip(0.0).operators.size(), 1u);
    EXPECT_EQ(phase_flip(1.0).operators[0], sigma(3));
    EXPECT_EQ(bit_phase_flip(0.0).operators.size(), 1u);
    EXPECT_EQ(bit_phase_flip(1.0).operators[0], sigma(2));

    AffineBlochMap pf = bloch_affine_of_channel(phase_flip(0.1));
    EXPECT_LE((pf.linear - Eigen::Vector3d(0.8, 0.8, 1.0).asDiagonal().toDenseMatrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
    AffineBlochMap bpf = bloch_affine_of_channel(bit_phase_flip(0.1));
    EXPECT_LE((bpf.linear - Eigen::Vector3d(0.8, 1.0, 0.8).asDiagonal().toDenseMatrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
}

TEST(channels, noise_range_is_checked) {
    EXPECT_THROW(bit_flip(-0.01), std::invalid_argument);
    EXPECT_THROW(phase_flip(1.01), std::invalid_argument);
    EXPECT_THROW(bit_phase_flip(std::nan("")), std::invalid_argument);
    EXPECT_THROW(amplitude_damping(2.0), std::invalid_argument);
}

TEST(channels, amplitude_damping_operators) {
    KrausSet k = amplitude_damping(0.0);
    ASSERT_EQ(k.operators.size(), 2u);
    EXPECT_EQ(k.operators[0], sigma(0));
    EXPECT_EQ(k.operators[1], Matrix2c::Zero());

    KrausSet half = amplitude_damping(0.36);
    EXPECT_DOUBLE_EQ(half.operators[0](1, 1).real(), 0.8);
    EXPECT_DOUBLE_EQ(half.operators[1](0, 1).real(), 0.6);

    std::mt19937_64 rng(1);
    for (int n = 0; n < 20; ++n) {
        BlochVector out = bloch_from_density(apply_channel(amplitude_damping(1.0), random_density(rng)));
        EXPECT_LE((out.r - Vector3(0, 0, 1)).norm(), 1e-15);
    }

    BlochVector centre = bloch_from_density(apply_channel(amplitude_damping(0.5), DensityMatrix()));
    EXPECT_LE((centre.r - Vector3(0, 0, 0.5)).norm(), 1e-15);
}

TEST(channels, amplitude_damping_affine_matches_probe_fit) {
    for (double gamma : {0.0, 0.05, 0.3, 0.7, 1.0}) {
        AffineBlochMap fit = fit_affine_from_probes(amplitude_damping(gamma));
        Matrix3 want = Vector3(std::sqrt(1 - gamma), std::sqrt(1 - gamma), 1 - gamma).asDiagonal();
        EXPECT_LE((fit.linear - want).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LE((fit.shift - Vector3(0, 0, gamma)).norm(), 1e-14);

        AffineBlochMap map = bloch_affine_of_channel(amplitude_damping(gamma));
        EXPECT_LE((map.linear - fit.linear).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LE((map.shift - fit.shift).norm(), 1e-14);
    }
}

TEST(channels, flip_affine_forms) {
    for (double p : {0.0, 0.05, 0.3}) {
        AffineBlochMap bf = bloch_affine_of_channel(bit_flip(p));
        Matrix3 want = Vector3(1, 1 - 2 * p, 1 - 2 * p).asDiagonal();
        EXPECT_LE((bf.linear - want).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LE(bf.shift.norm(), 1e-15);

        AffineBlochMap pf = bloch_affine_of_channel(phase_flip(p));
        want = Vector3(1 - 2 * p, 1 - 2 * p, 1).asDiagonal();
        EXPECT_LE((pf.linear - want).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(channels, identity_set_leaves_state_unchanged) {
    std::mt19937_64 rng(4);
    DensityMatrix rho = random_density(rng);
    EXPECT_EQ(apply_channel(KrausSet{{sigma(0)}}, rho).matrix(), rho.matrix());
}

TEST(channels, bit_flip_bloch_action) {
    std::mt19937_64 rng(8);
    for (double p : {0.01, 0.2, 0.6}) {
        for (int n = 0; n < 50; ++n) {
            BlochVector r = bloch_from_density(random_density(rng));
            BlochVector out = through(bit_flip(p), r);
            EXPECT_NEAR(out[0], r[0], 1e-14);
            EXPECT_NEAR(out[1], (1 - 2 * p) * r[1], 1e-14);
            EXPECT_NEAR(out[2], (1 - 2 * p) * r[2], 1e-14);
        }
    }
}

TEST(channels, incomplete_set_is_reported) {
    KrausSet scaled = bit_flip(0.3);
    for (auto &e : scaled.operators) e *= 0.5;
    ChannelDiagnostics diag;
    apply_channel(scaled, DensityMatrix(), &diag);
    EXPECT_FALSE(diag.complete);
    EXPECT_NEAR(diag.completeness_residual, 0.75 * std::sqrt(2.0), 1e-15);

    apply_channel(bit_flip(0.3), DensityMatrix(), &diag);
    EXPECT_TRUE(diag.complete);
}

TEST(channels, outputs_are_states_for_all_channels) {
    std::mt19937_64 rng(12);
    for (auto kind : kAllKinds) {
        for (double noise : kNoiseGrid) {
            KrausSet k = make_channel({kind, noise});
            EXPECT_LE(k.completeness_residual(), kCompletenessTolerance);
            for (int n = 0; n < 1000; ++n) {
                DensityMatrix out = apply_channel(k, random_density(rng));
                ASSERT_LE(std::abs(out.matrix().trace() - 1.0), 1e-12);
                ASSERT_TRUE(out.is_valid()) << channel_name(kind) << " " << noise;
            }
        }
    }
}

TEST(channels, affine_map_is_consistent_and_contractive) {
    std::mt19937_64 rng(13);
    for (auto kind : kAllKinds) {
        for (double noise : kNoiseGrid) {
            KrausSet k = make_channel({kind, noise});
            AffineBlochMap map = bloch_affine_of_channel(k);
            for (int n = 0; n < 1000; ++n) {
                DensityMatrix rho = random_density(rng);
                BlochVector direct = bloch_from_density(apply_channel(k, rho));
                BlochVector affine = map.apply(bloch_from_density(rho));
                ASSERT_LE((direct.r - affine.r).norm(), 1e-10);
                ASSERT_LE(map.apply(random_unit_ball(rng)).norm(), 1.0 + 1e-9);
            }
        }
    }
}

TEST(channels, flip_channels_are_convex_mixtures) {
    std::mt19937_64 rng(14);
    for (auto kind : {ChannelKind::BitFlip, ChannelKind::PhaseFlip, ChannelKind::BitPhaseFlip}) {
        const Matrix2c &s = sigma(flip_pauli_index(kind));
        for (double p : kNoiseGrid) {
            for (int n = 0; n < 200; ++n) {
                DensityMatrix rho = random_density(rng);
                Matrix2c want = (1 - p) * rho.matrix() + p * s * rho.matrix() * s;
                Matrix2c got = apply_channel(make_channel({kind, p}), rho).matrix();
                ASSERT_LE((got - want).cwiseAbs().maxCoeff(), 1e-12);
            }
        }
    }
}

TEST(channels, analytical_quasi_inverse_cases) {
    EXPECT_EQ(analytical_quasi_inverse({ChannelKind::BitFlip, 0.01}).operators[0], sigma(0));
    EXPECT_EQ(analytical_quasi_inverse({ChannelKind::BitFlip, 0.9}).operators[0], sigma(1));
    EXPECT_EQ(analytical_quasi_inverse({ChannelKind::PhaseFlip, 0.5}).operators[0], sigma(0));
    EXPECT_EQ(analytical_quasi_inverse({ChannelKind::BitPhaseFlip, 0.7}).operators[0], sigma(2));
    EXPECT_EQ(analytical_quasi_inverse({ChannelKind::AmplitudeDamping, 0.9}).operators[0],
              sigma(0));
}

TEST(channels, sigma_quasi_inverse_reduces_smtd_at_high_flip_probability) {
    // Average SMTD after recovery, against leaving the noisy state alone.
    KrausSet channel = bit_flip(0.9);
    KrausSet recovery = analytical_quasi_inverse({ChannelKind::BitFlip, 0.9});
    std::mt19937_64 rng(15);
    double with_identity = 0.0;
    double with_recovery = 0.0;
    for (int n = 0; n < 1000; ++n) {
        DensityMatrix rho = random_density(rng);
        BlochVector r = bloch_from_density(rho);
        DensityMatrix noisy = apply_channel(channel, rho);
        BlochVector rp = bloch_from_density(noisy);
        BlochVector recovered = bloch_from_density(apply_channel(recovery, noisy));
        with_identity += smtd(rp, r, rp.norm());
        with_recovery += smtd(recovered, r, rp.norm());
    }
    EXPECT_LT(with_recovery, with_identity);
    // sigma1 after bit_flip(0.9) is bit_flip(0.1).
    AffineBlochMap composed = bloch_affine_of_channel(
        KrausSet{{sigma(1) * channel.operators[0], sigma(1) * channel.operators[1]}});
    AffineBlochMap want = bloch_affine_of_channel(bit_flip(0.1));
    EXPECT_LE((composed.linear - want.linear).cwiseAbs().maxCoeff(), 1e-15);
}
