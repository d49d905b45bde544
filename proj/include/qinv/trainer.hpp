// Training a 3 -> 32 -> 3 linear-activation network as a quasi-inverse of a
// qubit channel, on Bloch vectors, with the scaled trace-distance loss.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qinv/bloch.hpp"
#include "qinv/channels.hpp"
#include "qinv/errors.hpp"

namespace qinv {

inline constexpr int kHiddenWidth = 32;

/// One training example: the noisy Bloch vector is the input, the clean one
/// the target, and `scale` = |input| the factor applied to the target.
struct Sample {
    BlochVector input;
    BlochVector target;
    double scale = 0.0;

    bool operator==(const Sample &) const = default;
};

struct Dataset {
    std::vector<Sample> samples;
    ChannelParams channel;
    std::uint64_t seed = 0;

    std::size_t size() const { return samples.size(); }
};

/// Builds the sample for clean state `target` sent through `channel`.
Sample make_sample(const KrausSet &channel, const DensityMatrix &target);

/// `n` Ginibre states sent through the channel. Throws on n < 1.
Dataset generate_dataset(const ChannelParams &channel, std::size_t n, std::uint64_t seed);

/// Largest |input - channel(target)| over the dataset.
double dataset_consistency_residual(const Dataset &dataset);

struct DatasetSplit {
    Dataset train;
    Dataset test;
};

/// Seeded shuffle, then the first round(fraction * n) samples train.
DatasetSplit split(const Dataset &dataset, double train_fraction, std::uint64_t seed);

struct NetworkParams {
    Eigen::Matrix<double, kHiddenWidth, 3> w1 = Eigen::Matrix<double, kHiddenWidth, 3>::Zero();
    Eigen::Matrix<double, kHiddenWidth, 1> b1 = Eigen::Matrix<double, kHiddenWidth, 1>::Zero();
    Eigen::Matrix<double, 3, kHiddenWidth> w2 = Eigen::Matrix<double, 3, kHiddenWidth>::Zero();
    Vector3 b2 = Vector3::Zero();

    static constexpr std::size_t kParameterCount = kHiddenWidth * 3 + kHiddenWidth +
                                                   3 * kHiddenWidth + 3;

    bool all_finite() const;

    std::vector<double> flatten() const;
    static NetworkParams unflatten(std::span<const double> values);

    bool operator==(const NetworkParams &other) const;
};

/// Glorot-uniform weights, zero biases.
NetworkParams init_params(std::uint64_t seed);

/// Network whose collapsed affine map is exactly (linear, shift).
NetworkParams params_from_affine(const AffineBlochMap &map);

BlochVector forward(const NetworkParams &params, const BlochVector &input);

/// Mean SMTD of the network predictions. Throws on an empty batch.
double loss(const NetworkParams &params, std::span<const Sample> batch);

/// Exact gradient of `loss`, laid out as a NetworkParams.
NetworkParams loss_gradient(const NetworkParams &params, std::span<const Sample> batch);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    NetworkParams m;
    NetworkParams v;
    std::uint64_t t = 0;
};

/// One bias-corrected Adam update; updates `state` and `params` in place.
void adam_step(AdamState &state, NetworkParams &params, const NetworkParams &grads,
               double learning_rate, const AdamConfig &adam = {});

struct TrainConfig {
    int epochs = 100;
    double learning_rate = 3e-4;
    int batch_size = 32;
    double train_fraction = 0.9;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

using LossHistory = std::vector<double>;

struct TrainResult {
    NetworkParams params;
    LossHistory history;
};

/// Mini-batch Adam over `epochs` passes. Deterministic in config.seed.
TrainResult train(const TrainConfig &config, const Dataset &dataset);

/// M = W2 W1, c = W2 b1 + b2.
AffineBlochMap collapse_to_affine(const NetworkParams &params);

/// Closed-form minimiser over affine maps of sum |M input + c - scale target|^2.
/// Throws NumericError when the design matrix is rank-deficient.
AffineBlochMap least_squares_oracle(const Dataset &dataset);

/// Mean SMTD of an affine map over the samples (same value as `loss` for a
/// network that collapses to `map`).
double affine_loss(const AffineBlochMap &map, std::span<const Sample> samples);

struct EvalReport {
    double msmtd_noisy = 0.0;
    double msmtd_recovered = 0.0;
    double improved_fraction = 0.0;
    std::optional<double> mean_purity_of_failures;
};

/// Compares leaving the noisy state alone against the network's recovery.
EvalReport evaluate(const NetworkParams &params, const Dataset &test);

/// density -> Bloch -> forward -> density, the network viewed as a qubit map.
std::function<DensityMatrix(const DensityMatrix &)> network_map(const NetworkParams &params);

}  // namespace qinv
