#include "qinv/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qinv/seeding.hpp"

namespace qinv {

namespace {

// Stream identifiers for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

template <typename A, typename B>
bool same_entries(const A &a, const B &b) {
    return std::equal(a.data(), a.data() + a.size(), b.data());
}

template <typename M>
void glorot_fill(M &m, std::mt19937_64 &rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    // Row-major fill order, independent of Eigen's storage order.
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = uniform(rng);
        }
    }
}

template <typename M>
void adam_tensor(M &param, M &m, M &v, const M &g, double lr, double c1, double c2,
                 const AdamConfig &adam) {
    m = adam.beta1 * m + (1.0 - adam.beta1) * g;
    v = adam.beta2 * v + (1.0 - adam.beta2) * g.cwiseProduct(g);
    auto m_hat = m.array() / c1;
    auto v_hat = v.array() / c2;
    param.array() -= lr * m_hat / (v_hat.sqrt() + adam.epsilon);
}

void require_nonempty(std::span<const Sample> batch) {
    if (batch.empty()) {
        throw std::invalid_argument("empty batch");
    }
}

}  // namespace

Sample make_sample(const KrausSet &channel, const DensityMatrix &target) {
    Sample s;
    s.target = bloch_from_density(target);
    s.input = bloch_from_density(apply_channel(channel, target));
    s.scale = s.input.norm();
    return s;
}

Dataset generate_dataset(const ChannelParams &channel, std::size_t n, std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("dataset needs at least one sample");
    }
    KrausSet kraus = make_channel(channel);
    std::mt19937_64 rng(seed);
    Dataset d;
    d.channel = channel;
    d.seed = seed;
    d.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.samples.push_back(make_sample(kraus, random_density(rng)));
    }
    return d;
}

double dataset_consistency_residual(const Dataset &dataset) {
    AffineBlochMap action = bloch_affine_of_channel(make_channel(dataset.channel));
    double worst = 0.0;
    for (const auto &s : dataset.samples) {
        worst = std::max(worst, (action.apply(s.target).r - s.input.r).norm());
    }
    return worst;
}

DatasetSplit split(const Dataset &dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(dataset.size())));
    DatasetSplit out;
    out.train.channel = out.test.channel = dataset.channel;
    out.train.seed = out.test.seed = dataset.seed;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto &part = i < n_train ? out.train : out.test;
        part.samples.push_back(dataset.samples[order[i]]);
    }
    return out;
}

bool NetworkParams::all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

std::vector<double> NetworkParams::flatten() const {
    std::vector<double> out;
    out.reserve(kParameterCount);
    out.insert(out.end(), w1.data(), w1.data() + w1.size());
    out.insert(out.end(), b1.data(), b1.data() + b1.size());
    out.insert(out.end(), w2.data(), w2.data() + w2.size());
    out.insert(out.end(), b2.data(), b2.data() + b2.size());
    return out;
}

NetworkParams NetworkParams::unflatten(std::span<const double> values) {
    if (values.size() != kParameterCount) {
        throw std::invalid_argument("wrong number of network parameters");
    }
    NetworkParams p;
    const double *cursor = values.data();
    std::copy_n(cursor, p.w1.size(), p.w1.data());
    cursor += p.w1.size();
    std::copy_n(cursor, p.b1.size(), p.b1.data());
    cursor += p.b1.size();
    std::copy_n(cursor, p.w2.size(), p.w2.data());
    cursor += p.w2.size();
    std::copy_n(cursor, p.b2.size(), p.b2.data());
    return p;
}

bool NetworkParams::operator==(const NetworkParams &other) const {
    return same_entries(w1, other.w1) && same_entries(b1, other.b1) &&
           same_entries(w2, other.w2) && same_entries(b2, other.b2);
}

NetworkParams init_params(std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, kInitStream));
    NetworkParams p;
    glorot_fill(p.w1, rng);
    glorot_fill(p.w2, rng);
    return p;
}

NetworkParams params_from_affine(const AffineBlochMap &map) {
    NetworkParams p;
    p.w1.topRows<3>() = map.linear;
    p.b1.head<3>() = map.shift;
    p.w2.leftCols<3>() = Matrix3::Identity();
    return p;
}

BlochVector forward(const NetworkParams &params, const BlochVector &input) {
    Eigen::Matrix<double, kHiddenWidth, 1> hidden = params.w1 * input.r + params.b1;
    return BlochVector(params.w2 * hidden + params.b2);
}

double loss(const NetworkParams &params, std::span<const Sample> batch) {
    require_nonempty(batch);
    double sum = 0.0;
    for (const auto &s : batch) {
        sum += smtd(forward(params, s.input), s.target, s.scale);
    }
    return sum / static_cast<double>(batch.size());
}

NetworkParams loss_gradient(const NetworkParams &params, std::span<const Sample> batch) {
    require_nonempty(batch);
    NetworkParams g;
    double weight = 0.5 / static_cast<double>(batch.size());
    for (const auto &s : batch) {
        Eigen::Matrix<double, kHiddenWidth, 1> hidden = params.w1 * s.input.r + params.b1;
        Vector3 out = params.w2 * hidden + params.b2;
        // d/d(out) of 1/4 |out - scale * target|^2, averaged over the batch.
        Vector3 g_out = weight * (out - s.scale * s.target.r);
        g.w2 += g_out * hidden.transpose();
        g.b2 += g_out;
        Eigen::Matrix<double, kHiddenWidth, 1> g_hidden = params.w2.transpose() * g_out;
        g.w1 += g_hidden * s.input.r.transpose();
        g.b1 += g_hidden;
    }
    return g;
}

void adam_step(AdamState &state, NetworkParams &params, const NetworkParams &grads,
               double learning_rate, const AdamConfig &adam) {
    state.t += 1;
    double t = static_cast<double>(state.t);
    double c1 = 1.0 - std::pow(adam.beta1, t);
    double c2 = 1.0 - std::pow(adam.beta2, t);
    adam_tensor(params.w1, state.m.w1, state.v.w1, grads.w1, learning_rate, c1, c2, adam);
    adam_tensor(params.b1, state.m.b1, state.v.b1, grads.b1, learning_rate, c1, c2, adam);
    adam_tensor(params.w2, state.m.w2, state.v.w2, grads.w2, learning_rate, c1, c2, adam);
    adam_tensor(params.b2, state.m.b2, state.v.b2, grads.b2, learning_rate, c1, c2, adam);
}

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw std::invalid_argument("epochs must be at least 1");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("batch_size must be at least 1");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be finite and non-negative");
    }
}

TrainResult train(const TrainConfig &config, const Dataset &dataset) {
    config.validate();
    auto batch = static_cast<std::size_t>(config.batch_size);
    if (dataset.size() < batch) {
        throw std::invalid_argument("dataset smaller than one batch");
    }

    TrainResult result;
    result.params = init_params(config.seed);
    result.history.reserve(static_cast<std::size_t>(config.epochs));
    AdamState adam;

    std::vector<std::size_t> order(dataset.size());
    std::vector<Sample> minibatch;
    minibatch.reserve(batch);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(
            derive_seed(derive_seed(config.seed, kShuffleStream), static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::size_t stop = std::min(order.size(), start + batch);
            minibatch.clear();
            for (std::size_t i = start; i < stop; ++i) {
                minibatch.push_back(dataset.samples[order[i]]);
            }
            epoch_sum += loss(result.params, minibatch) * static_cast<double>(minibatch.size());
            adam_step(adam, result.params, loss_gradient(result.params, minibatch),
                      config.learning_rate);
        }
        result.history.push_back(epoch_sum / static_cast<double>(order.size()));
    }
    return result;
}

AffineBlochMap collapse_to_affine(const NetworkParams &params) {
    AffineBlochMap map;
    map.linear = params.w2 * params.w1;
    map.shift = params.w2 * params.b1 + params.b2;
    return map;
}

AffineBlochMap least_squares_oracle(const Dataset &dataset) {
    if (dataset.size() < 4) {
        throw std::invalid_argument("least-squares fit needs at least 4 samples");
    }
    Eigen::Matrix4d normal = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 4, 3> rhs = Eigen::Matrix<double, 4, 3>::Zero();
    for (const auto &s : dataset.samples) {
        Eigen::Vector4d row;
        row << s.input.r, 1.0;
        normal += row * row.transpose();
        rhs += row * (s.scale * s.target.r).transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> spectrum(normal, Eigen::EigenvaluesOnly);
    double lo = spectrum.eigenvalues()(0);
    double hi = spectrum.eigenvalues()(3);
    if (!(lo > 1e-12 * hi)) {
        throw NumericError("least-squares design matrix is rank-deficient");
    }
    Eigen::Matrix<double, 4, 3> coef = normal.ldlt().solve(rhs);
    AffineBlochMap map;
    map.linear = coef.topRows<3>().transpose();
    map.shift = coef.row(3).transpose();
    return map;
}

double affine_loss(const AffineBlochMap &map, std::span<const Sample> samples) {
    require_nonempty(samples);
    double sum = 0.0;
    for (const auto &s : samples) {
        sum += smtd(map.apply(s.input), s.target, s.scale);
    }
    return sum / static_cast<double>(samples.size());
}

EvalReport evaluate(const NetworkParams &params, const Dataset &test) {
    if (test.samples.empty()) {
        throw std::invalid_argument("empty test set");
    }
    EvalReport report;
    std::size_t improved = 0;
    double failure_purity = 0.0;
    std::size_t failures = 0;
    for (const auto &s : test.samples) {
        double noisy = smtd(s.input, s.target, s.scale);
        double recovered = smtd(forward(params, s.input), s.target, s.scale);
        report.msmtd_noisy += noisy;
        report.msmtd_recovered += recovered;
        if (recovered < noisy) {
            ++improved;
        } else {
            failure_purity += 0.5 * (1.0 + s.target.r.squaredNorm());
            ++failures;
        }
    }
    auto n = static_cast<double>(test.size());
    report.msmtd_noisy /= n;
    report.msmtd_recovered /= n;
    report.improved_fraction = static_cast<double>(improved) / n;
    if (failures > 0) {
        report.mean_purity_of_failures = failure_purity / static_cast<double>(failures);
    }
    return report;
}

std::function<DensityMatrix(const DensityMatrix &)> network_map(const NetworkParams &params) {
    return [params](const DensityMatrix &rho) {
        return DensityMatrix(matrix_from_bloch(forward(params, bloch_from_density(rho))));
    };
}

}  // namespace qinv
