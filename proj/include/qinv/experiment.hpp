// Experiment driver behind the qinv_cli subcommands: configuration, the
// on-disk artifact formats, per-noise training runs and sweeps.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qinv/channels.hpp"
#include "qinv/errors.hpp"
#include "qinv/tomography.hpp"
#include "qinv/trainer.hpp"

namespace qinv {

namespace fs = std::filesystem;

struct ExperimentConfig {
    ChannelKind channel = ChannelKind::BitFlip;
    std::vector<double> noise = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
    std::size_t samples = 1000;
    TrainConfig train;
    std::string output_dir;
    std::uint64_t seed = 0;

    /// Throws ConfigError.
    void validate() const;
};

/// Parses the JSON config. Every key is optional; unknown keys, wrong types
/// and out-of-range values raise ConfigError.
ExperimentConfig parse_config(const std::string &json_text);
ExperimentConfig load_config(const fs::path &path);

/// Writes `content` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const fs::path &path, const std::string &content);
std::string read_file(const fs::path &path);

/// 17 significant digits, which reads back to the same double.
std::string format_double(double x);

/// Directory/file label for a noise value, e.g. "noise_0.05".
std::string noise_label(double noise);

inline constexpr const char *kDatasetHeader = "r1p,r2p,r3p,r1,r2,r3,scale";
std::string dataset_to_csv(const Dataset &dataset);
/// Throws IoError on malformed CSV.
Dataset dataset_from_csv(const std::string &csv, const ChannelParams &channel, std::uint64_t seed);

inline constexpr const char *kSweepHeader =
    "noise,msmtd_noisy,msmtd_recovered,improved_fraction,mean_purity_of_failures,final_train_loss";

struct SweepRecord {
    double noise = 0.0;
    double msmtd_noisy = 0.0;
    double msmtd_recovered = 0.0;
    double improved_fraction = 0.0;
    std::optional<double> mean_purity_of_failures;
    double final_train_loss = 0.0;
};

std::string sweep_to_csv(const std::vector<SweepRecord> &records);
std::string loss_history_to_csv(const LossHistory &history);

/// What a run artifact describes: a trained network, a bare affine Bloch
/// map, or one of the exact channels.
using Model = std::variant<NetworkParams, AffineBlochMap, ChannelParams>;

std::string model_to_json(const Model &model);
/// Throws IoError when the JSON is not a valid model description.
Model model_from_json(const std::string &json_text);
QubitMap model_map(const Model &model);

std::string tomography_to_json(const QptResult &result);
std::string tomography_to_text(const QptResult &result);

/// Derived seeds for the independent random streams of one noise point.
struct PointSeeds {
    std::uint64_t data;
    std::uint64_t split;
    std::uint64_t train;
    std::uint64_t evaluation;
};
PointSeeds point_seeds(std::uint64_t seed, std::size_t index);

struct PointResult {
    double noise = 0.0;
    TrainResult trained;
    DatasetSplit data;
    EvalReport held_out;  // on the test split
    EvalReport fresh;     // on `samples` newly drawn states
};

/// Generate, split, train and evaluate at config.noise[index].
PointResult run_point(const ExperimentConfig &config, std::size_t index);

/// All noise points, possibly in parallel; results in config order. A failure
/// is rethrown naming the noise value.
std::vector<PointResult> run_all_points(const ExperimentConfig &config);

SweepRecord sweep_record(const PointResult &point);

// Subcommands. Each throws ConfigError, NumericError or IoError.
void cmd_gen_data(const ExperimentConfig &config, const fs::path &out);
void cmd_train(const ExperimentConfig &config, const fs::path &out);
void cmd_sweep(const ExperimentConfig &config, const fs::path &out);
/// `run` is either a directory holding params.json or one whose
/// subdirectories do; reports mirror that layout under `out`.
void cmd_tomography(const fs::path &run, const fs::path &out);

}  // namespace qinv
