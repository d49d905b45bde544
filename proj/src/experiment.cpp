#include "qinv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "json.hpp"
#include "qinv/seeding.hpp"

namespace qinv {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {"channel",    "noise",          "samples",
                                           "epochs",     "learning_rate",  "batch_size",
                                           "train_fraction", "output_dir", "seed"};

template <typename T>
T config_value(const json &j, const char *key) {
    const json &v = j.at(key);
    // json's own conversions silently truncate 2.5 to 2 and wrap -1.
    if constexpr (std::is_integral_v<T>) {
        bool ok = std::is_unsigned_v<T> ? v.is_number_unsigned() : v.is_number_integer();
        if (!ok) {
            throw ConfigError(std::string("config field '") + key + "' must be " +
                              (std::is_unsigned_v<T> ? "a non-negative integer" : "an integer"));
        }
    }
    try {
        return v.get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

template <typename M>
json matrix_to_json(const M &m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename V>
json vector_to_json(const V &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

template <typename M>
json complex_matrix_to_json(const M &m) {
    return {{"real", matrix_to_json(m.real().eval())}, {"imag", matrix_to_json(m.imag().eval())}};
}

template <typename M>
void matrix_from_json(const json &j, M &m, const char *name) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(m.rows())) {
        throw IoError(std::string("model field '") + name + "' has the wrong shape");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const json &row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(m.cols())) {
            throw IoError(std::string("model field '") + name + "' has the wrong shape");
        }
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
        }
    }
}

template <typename V>
void vector_from_json(const json &j, V &v, const char *name) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(v.size())) {
        throw IoError(std::string("model field '") + name + "' has the wrong length");
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    }
}

json optional_to_json(const std::optional<double> &x) {
    return x ? json(*x) : json(nullptr);
}

json eval_to_json(const EvalReport &r) {
    return {{"msmtd_noisy", r.msmtd_noisy},
            {"msmtd_recovered", r.msmtd_recovered},
            {"improved_fraction", r.improved_fraction},
            {"mean_purity_of_failures", optional_to_json(r.mean_purity_of_failures)}};
}

std::string format_fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string kraus_expression(const Matrix2c &e) {
    static const char *names[] = {"I", "sigma1", "sigma2", "sigma3"};
    auto coefficients = pauli_coefficients(e);
    std::string out;
    for (int m = 0; m < 4; ++m) {
        Complex a = coefficients[m];
        if (std::abs(a) < 5e-5) {
            continue;
        }
        std::string term;
        if (std::abs(a.imag()) < 5e-5) {
            term = format_fixed(a.real(), 4);
            if (!out.empty() && a.real() >= 0.0) {
                term = "+" + term;
            }
        } else {
            term = (out.empty() ? "(" : "+(") + format_fixed(a.real(), 4) +
                   (a.imag() >= 0.0 ? "+" : "") + format_fixed(a.imag(), 4) + "i)";
        }
        out += term + names[m];
    }
    return out.empty() ? "0" : out;
}

void ensure_directory(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

void tomograph_one(const fs::path &params_file, const fs::path &out_dir) {
    Model model = model_from_json(read_file(params_file));
    QptResult result = qpt(model_map(model));
    ensure_directory(out_dir);
    write_file_atomic(out_dir / "tomography.json", tomography_to_json(result));
    write_file_atomic(out_dir / "tomography.txt", tomography_to_text(result));
}

}  // namespace

void ExperimentConfig::validate() const {
    if (noise.empty()) {
        throw ConfigError("at least one noise value is required");
    }
    std::set<std::string> labels;
    for (double x : noise) {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw ConfigError("noise value " + format_double(x) + " outside [0, 1]");
        }
        if (!labels.insert(noise_label(x)).second) {
            throw ConfigError("duplicate noise value " + format_double(x));
        }
    }
    if (samples < 10) {
        throw ConfigError("samples must be at least 10");
    }
    try {
        train.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig parse_config(const std::string &json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    for (const auto &item : j.items()) {
        if (!kConfigKeys.contains(item.key())) {
            throw ConfigError("unknown config key '" + item.key() + "'");
        }
    }

    ExperimentConfig c;
    if (j.contains("channel")) {
        try {
            c.channel = parse_channel_kind(config_value<std::string>(j, "channel"));
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    if (j.contains("noise")) c.noise = config_value<std::vector<double>>(j, "noise");
    if (j.contains("samples")) c.samples = config_value<std::size_t>(j, "samples");
    if (j.contains("epochs")) c.train.epochs = config_value<int>(j, "epochs");
    if (j.contains("learning_rate")) c.train.learning_rate = config_value<double>(j, "learning_rate");
    if (j.contains("batch_size")) c.train.batch_size = config_value<int>(j, "batch_size");
    if (j.contains("train_fraction"))
        c.train.train_fraction = config_value<double>(j, "train_fraction");
    if (j.contains("output_dir")) c.output_dir = config_value<std::string>(j, "output_dir");
    if (j.contains("seed")) c.seed = config_value<std::uint64_t>(j, "seed");
    c.train.seed = c.seed;
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path &path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError &e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

void write_file_atomic(const fs::path &path, const std::string &content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        f << content;
        f.flush();
        if (!f) {
            throw IoError("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
    }
}

std::string read_file(const fs::path &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string noise_label(double noise) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "noise_%.6g", noise);
    return buf;
}

std::string dataset_to_csv(const Dataset &dataset) {
    std::string out = std::string(kDatasetHeader) + "\n";
    for (const auto &s : dataset.samples) {
        for (int i = 0; i < 3; ++i) out += format_double(s.input[i]) + ",";
        for (int i = 0; i < 3; ++i) out += format_double(s.target[i]) + ",";
        out += format_double(s.scale) + "\n";
    }
    return out;
}

Dataset dataset_from_csv(const std::string &csv, const ChannelParams &channel, std::uint64_t seed) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kDatasetHeader) {
        throw IoError("dataset CSV header mismatch");
    }
    Dataset d;
    d.channel = channel;
    d.seed = seed;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::array<double, 7> v{};
        const char *cursor = line.c_str();
        for (std::size_t i = 0; i < v.size(); ++i) {
            char *end = nullptr;
            v[i] = std::strtod(cursor, &end);
            bool last = i + 1 == v.size();
            if (end == cursor || (last ? *end != '\0' : *end != ',')) {
                throw IoError("malformed dataset row " + std::to_string(line_no));
            }
            cursor = last ? end : end + 1;
        }
        Sample s;
        s.input = BlochVector(v[0], v[1], v[2]);
        s.target = BlochVector(v[3], v[4], v[5]);
        s.scale = v[6];
        d.samples.push_back(s);
    }
    return d;
}

std::string sweep_to_csv(const std::vector<SweepRecord> &records) {
    std::string out = std::string(kSweepHeader) + "\n";
    for (const auto &r : records) {
        out += format_double(r.noise) + "," + format_double(r.msmtd_noisy) + "," +
               format_double(r.msmtd_recovered) + "," + format_double(r.improved_fraction) + "," +
               (r.mean_purity_of_failures ? format_double(*r.mean_purity_of_failures) : "") + "," +
               format_double(r.final_train_loss) + "\n";
    }
    return out;
}

std::string loss_history_to_csv(const LossHistory &history) {
    std::string out = "epoch,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        out += std::to_string(i + 1) + "," + format_double(history[i]) + "\n";
    }
    return out;
}

std::string model_to_json(const Model &model) {
    json j;
    if (const auto *net = std::get_if<NetworkParams>(&model)) {
        j = {{"model", "network"},
             {"hidden", kHiddenWidth},
             {"w1", matrix_to_json(net->w1)},
             {"b1", vector_to_json(net->b1)},
             {"w2", matrix_to_json(net->w2)},
             {"b2", vector_to_json(net->b2)}};
    } else if (const auto *affine = std::get_if<AffineBlochMap>(&model)) {
        j = {{"model", "affine"},
             {"M", matrix_to_json(affine->linear)},
             {"c", vector_to_json(affine->shift)}};
    } else {
        const auto &params = std::get<ChannelParams>(model);
        j = {{"model", "channel"},
             {"kind", std::string(channel_name(params.kind))},
             {"noise", params.noise}};
    }
    return j.dump(2) + "\n";
}

Model model_from_json(const std::string &json_text) {
    try {
        json j = json::parse(json_text);
        std::string kind = j.at("model").get<std::string>();
        if (kind == "network") {
            if (j.at("hidden").get<int>() != kHiddenWidth) {
                throw IoError("network hidden width mismatch");
            }
            NetworkParams p;
            matrix_from_json(j.at("w1"), p.w1, "w1");
            vector_from_json(j.at("b1"), p.b1, "b1");
            matrix_from_json(j.at("w2"), p.w2, "w2");
            vector_from_json(j.at("b2"), p.b2, "b2");
            if (!p.all_finite()) {
                throw IoError("network parameters are not finite");
            }
            return p;
        }
        if (kind == "affine") {
            AffineBlochMap map;
            matrix_from_json(j.at("M"), map.linear, "M");
            vector_from_json(j.at("c"), map.shift, "c");
            return map;
        }
        if (kind == "channel") {
            ChannelParams params{parse_channel_kind(j.at("kind").get<std::string>()),
                                 j.at("noise").get<double>()};
            make_channel(params);  // range check
            return params;
        }
        throw IoError("unknown model type '" + kind + "'");
    } catch (const json::exception &e) {
        throw IoError(std::string("corrupt model file: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw IoError(std::string("corrupt model file: ") + e.what());
    }
}

QubitMap model_map(const Model &model) {
    if (const auto *net = std::get_if<NetworkParams>(&model)) {
        return network_map(*net);
    }
    if (const auto *affine = std::get_if<AffineBlochMap>(&model)) {
        AffineBlochMap map = *affine;
        return [map](const DensityMatrix &rho) {
            return DensityMatrix(matrix_from_bloch(map.apply(bloch_from_density(rho))));
        };
    }
    KrausSet k = make_channel(std::get<ChannelParams>(model));
    return [k](const DensityMatrix &rho) { return apply_channel(k, rho); };
}

std::string tomography_to_json(const QptResult &result) {
    json kraus = json::array();
    for (const auto &e : result.kraus.operators) {
        auto a = pauli_coefficients(e);
        json re = json::array(), im = json::array();
        for (const auto &x : a) {
            re.push_back(x.real());
            im.push_back(x.imag());
        }
        json entry = complex_matrix_to_json(e);
        entry["pauli_coefficients"] = {{"real", re}, {"imag", im}};
        kraus.push_back(std::move(entry));
    }
    json j = {{"chi", complex_matrix_to_json(result.chi.chi.entries)},
              {"chi_asymmetry", result.chi.asymmetry},
              {"solve_residual", result.chi.solve_residual},
              {"probe_defect", result.probe_defect},
              {"eigenvalues", result.eigen.values},
              {"kraus", kraus},
              {"cptp",
               {{"delta_norm", result.cptp.delta_norm}, {"min_chi_eig", result.cptp.min_chi_eig}}}};
    return j.dump(2) + "\n";
}

std::string tomography_to_text(const QptResult &result) {
    std::ostringstream out;
    const Matrix4c &chi = result.chi.chi.entries;
    out << "chi matrix (real part), basis order I, sigma1, sigma2, sigma3\n";
    for (int m = 0; m < 4; ++m) {
        out << " ";
        for (int n = 0; n < 4; ++n) {
            out << " " << format_fixed(chi(m, n).real(), 4);
        }
        out << "\n";
    }
    out << "chi matrix (imaginary part)\n";
    for (int m = 0; m < 4; ++m) {
        out << " ";
        for (int n = 0; n < 4; ++n) {
            out << " " << format_fixed(chi(m, n).imag(), 4);
        }
        out << "\n";
    }
    out << "trace " << format_double(chi.trace().real()) << "\n";
    out << "asymmetry before hermitization " << format_double(result.chi.asymmetry) << "\n";
    out << "eigenvalues";
    for (double d : result.eigen.values) {
        out << " " << format_fixed(d, 6);
    }
    out << "\nKraus operators\n";
    for (std::size_t i = 0; i < result.kraus.operators.size(); ++i) {
        out << "  E_" << i << " = " << kraus_expression(result.kraus.operators[i]) << "\n";
    }
    out << "sum E^dag E = I + delta, max |delta| = " << format_double(result.cptp.delta_norm)
        << "\n";
    out << "min chi eigenvalue of Kraus set " << format_double(result.cptp.min_chi_eig) << "\n";
    return out.str();
}

PointSeeds point_seeds(std::uint64_t seed, std::size_t index) {
    std::uint64_t base = derive_seed(seed, index);
    return {derive_seed(base, 1), derive_seed(base, 2), derive_seed(base, 3), derive_seed(base, 4)};
}

PointResult run_point(const ExperimentConfig &config, std::size_t index) {
    PointSeeds seeds = point_seeds(config.seed, index);
    ChannelParams channel{config.channel, config.noise.at(index)};

    PointResult r;
    r.noise = channel.noise;
    Dataset all = generate_dataset(channel, config.samples, seeds.data);
    r.data = split(all, config.train.train_fraction, seeds.split);

    TrainConfig tc = config.train;
    tc.seed = seeds.train;
    r.trained = train(tc, r.data.train);
    r.held_out = evaluate(r.trained.params, r.data.test);
    r.fresh = evaluate(r.trained.params, generate_dataset(channel, config.samples, seeds.evaluation));
    return r;
}

std::vector<PointResult> run_all_points(const ExperimentConfig &config) {
    config.validate();
    std::size_t n = config.noise.size();
    std::vector<PointResult> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = run_point(config, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::size_t threads = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto &t : pool) {
        t.join();
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i]) {
            continue;
        }
        std::string where = "noise " + format_double(config.noise[i]) + ": ";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const NumericError &e) {
            throw NumericError(where + e.what());
        } catch (const std::invalid_argument &e) {
            throw ConfigError(where + e.what());
        } catch (const std::exception &e) {
            throw NumericError(where + e.what());
        }
    }
    return results;
}

SweepRecord sweep_record(const PointResult &point) {
    SweepRecord r;
    r.noise = point.noise;
    r.msmtd_noisy = point.fresh.msmtd_noisy;
    r.msmtd_recovered = point.fresh.msmtd_recovered;
    r.improved_fraction = point.fresh.improved_fraction;
    r.mean_purity_of_failures = point.fresh.mean_purity_of_failures;
    r.final_train_loss = point.trained.history.back();
    return r;
}

void cmd_gen_data(const ExperimentConfig &config, const fs::path &out) {
    config.validate();
    ensure_directory(out);
    for (std::size_t i = 0; i < config.noise.size(); ++i) {
        ChannelParams channel{config.channel, config.noise[i]};
        std::uint64_t seed = point_seeds(config.seed, i).data;
        Dataset d = generate_dataset(channel, config.samples, seed);
        std::string stem = "dataset_" + noise_label(channel.noise);
        json meta = {{"channel", std::string(channel_name(channel.kind))},
                     {"noise", channel.noise},
                     {"seed", seed},
                     {"samples", d.size()}};
        write_file_atomic(out / (stem + ".csv"), dataset_to_csv(d));
        write_file_atomic(out / (stem + ".json"), meta.dump(2) + "\n");
    }
}

void cmd_train(const ExperimentConfig &config, const fs::path &out) {
    std::vector<PointResult> points = run_all_points(config);
    for (const auto &p : points) {
        fs::path dir = out / noise_label(p.noise);
        ensure_directory(dir);
        write_file_atomic(dir / "params.json", model_to_json(p.trained.params));
        write_file_atomic(dir / "loss_history.csv", loss_history_to_csv(p.trained.history));
        json report = {{"channel", std::string(channel_name(config.channel))},
                       {"noise", p.noise},
                       {"seed", config.seed},
                       {"final_train_loss", p.trained.history.back()},
                       {"held_out", eval_to_json(p.held_out)},
                       {"fresh", eval_to_json(p.fresh)}};
        write_file_atomic(dir / "eval.json", report.dump(2) + "\n");
    }
}

void cmd_sweep(const ExperimentConfig &config, const fs::path &out) {
    std::vector<PointResult> points = run_all_points(config);
    std::vector<SweepRecord> records;
    records.reserve(points.size());
    for (const auto &p : points) {
        records.push_back(sweep_record(p));
    }
    ensure_directory(out);
    write_file_atomic(out / ("sweep_" + std::string(channel_name(config.channel)) + ".csv"),
                      sweep_to_csv(records));
}

void cmd_tomography(const fs::path &run, const fs::path &out) {
    if (fs::is_regular_file(run / "params.json")) {
        tomograph_one(run / "params.json", out);
        return;
    }
    if (!fs::is_directory(run)) {
        throw IoError("run artifact " + run.string() + " does not exist");
    }
    std::vector<fs::path> runs;
    for (const auto &entry : fs::directory_iterator(run)) {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / "params.json")) {
            runs.push_back(entry.path());
        }
    }
    if (runs.empty()) {
        throw IoError("no params.json found under " + run.string());
    }
    std::sort(runs.begin(), runs.end());
    for (const auto &dir : runs) {
        tomograph_one(dir / "params.json", out / dir.filename());
    }
}

}  // namespace qinv
