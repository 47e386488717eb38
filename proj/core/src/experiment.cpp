#include "imbalance/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <initializer_list>
#include <ostream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "imbalance/random.hpp"

namespace imbalance {

using nlohmann::json;

namespace {

void require_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(std::string(where) + ": expected an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(std::string(where) + ": unknown field '" + key + "'");
        }
    }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
    if (const auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("field '") + key + "': " + e.what());
        }
    }
}

std::string read_string(const json& obj, const char* key, std::string fallback) {
    read(obj, key, fallback);
    return fallback;
}

template <class F>
auto wrap_config(F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ResultRow row_template(const ExperimentConfig& config) {
    ResultRow row;
    row.loss = config.loss.kind;
    row.ratio = config.data.ratio;
    row.transform = config.transform.kind;
    row.alpha = config.loss.alpha;
    row.beta = config.loss.beta;
    row.gamma = config.loss.gamma;
    return row;
}

ClassifierMetrics aggregate(const std::vector<ClassifierMetrics>& ms, bool stddev) {
    const auto n = static_cast<double>(ms.size());
    auto stat = [&](double ClassifierMetrics::*field) {
        double mean = 0.0;
        for (const auto& m : ms) {
            mean += m.*field;
        }
        mean /= n;
        if (!stddev) {
            return mean;
        }
        if (ms.size() < 2) {
            return 0.0;
        }
        double ss = 0.0;
        for (const auto& m : ms) {
            ss += (m.*field - mean) * (m.*field - mean);
        }
        return std::sqrt(ss / (n - 1.0));
    };
    return {stat(&ClassifierMetrics::precision), stat(&ClassifierMetrics::recall), stat(&ClassifierMetrics::f1),
            stat(&ClassifierMetrics::accuracy)};
}

auto sort_key(const ResultRow& r) {
    return std::make_tuple(static_cast<int>(r.loss), r.ratio, r.alpha, static_cast<int>(r.kind), r.seed);
}

}  // namespace

ExperimentError::ExperimentError(std::uint64_t seed, const std::string& what)
    : std::runtime_error("replicate seed " + std::to_string(seed) + ": " + what), seed_(seed) {}

void ExperimentConfig::validate() const {
    wrap_config([&] {
        data.validate();
        loss.validate();
        model.validate();
        train.validate();
        return 0;
    });
    if (replicate_seeds.empty()) {
        throw ConfigError("replicate_seeds must not be empty");
    }
    if (!(eval_threshold > 0.0 && eval_threshold < 1.0)) {
        throw ConfigError("eval_threshold must be in (0,1)");
    }
    if (!std::isfinite(transform.jitter_sigma) || transform.jitter_sigma < 0.0) {
        throw ConfigError("transform.jitter_sigma must be >= 0");
    }
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["data"] = {
        {"n_positive", c.data.n_positive},
        {"ratio", c.data.ratio},
        {"easy_negative_fraction", c.data.easy_negative_fraction},
        {"feature_dim", c.data.feature_dim},
        {"seed", c.data.seed},
        {"jitter_sigma", c.data.jitter_sigma},
    };
    j["transform"] = {
        {"kind", std::string(to_string(c.transform.kind))},
        {"target_fraction_positive", c.transform.target_fraction_positive},
        {"growth_factor", c.transform.growth_factor},
        {"seed", c.transform.seed},
        {"jitter_sigma", c.transform.jitter_sigma},
    };
    j["loss"] = {
        {"kind", std::string(to_string(c.loss.kind))},
        {"alpha", c.loss.alpha},
        {"beta", c.loss.beta},
        {"gamma", c.loss.gamma},
        {"k", c.loss.k},
        {"detach_weight", c.loss.detach_weight},
        {"log_base", c.loss.log_base},
    };
    j["model"] = {
        {"arch", std::string(to_string(c.model.arch))},
        {"hidden_units", c.model.hidden_units},
        {"activation", "tanh"},
    };
    j["train"] = {
        {"learning_rate", c.train.learning_rate},
        {"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"seed", c.train.seed},
        {"init_scale", c.train.init_scale},
    };
    j["eval_threshold"] = c.eval_threshold;
    j["replicate_seeds"] = c.replicate_seeds;
    return j.dump(2);
}

ExperimentConfig config_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require_keys(j, "config", {"data", "transform", "loss", "model", "train", "eval_threshold", "replicate_seeds"});

    ExperimentConfig c;
    if (const auto it = j.find("data"); it != j.end()) {
        const json& d = *it;
        require_keys(d, "data", {"n_positive", "ratio", "easy_negative_fraction", "feature_dim", "seed", "jitter_sigma"});
        read(d, "n_positive", c.data.n_positive);
        read(d, "ratio", c.data.ratio);
        read(d, "easy_negative_fraction", c.data.easy_negative_fraction);
        read(d, "feature_dim", c.data.feature_dim);
        read(d, "seed", c.data.seed);
        read(d, "jitter_sigma", c.data.jitter_sigma);
    }
    if (const auto it = j.find("transform"); it != j.end()) {
        const json& t = *it;
        require_keys(t, "transform", {"kind", "target_fraction_positive", "growth_factor", "seed", "jitter_sigma"});
        c.transform.kind =
            wrap_config([&] { return transform_kind_from_string(read_string(t, "kind", "original")); });
        read(t, "target_fraction_positive", c.transform.target_fraction_positive);
        read(t, "growth_factor", c.transform.growth_factor);
        read(t, "seed", c.transform.seed);
        read(t, "jitter_sigma", c.transform.jitter_sigma);
    }
    if (const auto it = j.find("loss"); it != j.end()) {
        const json& l = *it;
        require_keys(l, "loss", {"kind", "alpha", "beta", "gamma", "k", "detach_weight", "log_base"});
        c.loss = LossSpec::defaults_for(wrap_config([&] { return loss_kind_from_string(read_string(l, "kind", "CE")); }));
        read(l, "alpha", c.loss.alpha);
        read(l, "beta", c.loss.beta);
        read(l, "gamma", c.loss.gamma);
        read(l, "k", c.loss.k);
        read(l, "detach_weight", c.loss.detach_weight);
        read(l, "log_base", c.loss.log_base);
    }
    if (const auto it = j.find("model"); it != j.end()) {
        const json& m = *it;
        require_keys(m, "model", {"arch", "hidden_units", "activation"});
        c.model.arch = wrap_config([&] { return arch_from_string(read_string(m, "arch", "linear")); });
        read(m, "hidden_units", c.model.hidden_units);
        if (read_string(m, "activation", "tanh") != "tanh") {
            throw ConfigError("model.activation: only 'tanh' is supported");
        }
    }
    if (const auto it = j.find("train"); it != j.end()) {
        const json& t = *it;
        require_keys(t, "train", {"learning_rate", "epochs", "batch_size", "seed", "init_scale"});
        read(t, "learning_rate", c.train.learning_rate);
        read(t, "epochs", c.train.epochs);
        read(t, "batch_size", c.train.batch_size);
        read(t, "seed", c.train.seed);
        read(t, "init_scale", c.train.init_scale);
    }
    read(j, "eval_threshold", c.eval_threshold);
    read(j, "replicate_seeds", c.replicate_seeds);
    c.validate();
    return c;
}

DataSpec test_data_spec(const DataSpec& train_spec) {
    DataSpec test = train_spec;
    test.seed = train_spec.seed + 1;
    test.n_positive = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(train_spec.n_positive))));
    return test;
}

ClassifierMetrics run_replicate(const ExperimentConfig& config, const LabeledBatch& test_set,
                                std::uint64_t replicate_seed) {
    DataSpec data = config.data;
    data.seed = derive_seed(config.data.seed, replicate_seed);
    TransformSpec tspec = config.transform;
    tspec.seed = derive_seed(config.transform.seed, replicate_seed);
    TrainSpec train_spec = config.train;
    train_spec.seed = derive_seed(config.train.seed, replicate_seed);

    const LabeledBatch train_set = transform(generate(data), tspec);
    const TrainedModel model = imbalance::train(train_set, config.loss, config.model, train_spec);
    return evaluate(model, test_set, config.eval_threshold);
}

std::vector<ResultRow> run(const ExperimentConfig& config) {
    config.validate();
    const LabeledBatch test_set = generate(test_data_spec(config.data));

    std::vector<std::future<ClassifierMetrics>> jobs;
    jobs.reserve(config.replicate_seeds.size());
    for (const std::uint64_t seed : config.replicate_seeds) {
        jobs.push_back(std::async(std::launch::async, [&config, &test_set, seed] {
            return run_replicate(config, test_set, seed);
        }));
    }

    std::vector<ResultRow> rows;
    std::vector<ClassifierMetrics> metrics;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::uint64_t seed = config.replicate_seeds[i];
        try {
            metrics.push_back(jobs[i].get());
        } catch (const std::exception& e) {
            // Drain the remaining jobs before reporting.
            for (std::size_t k = i + 1; k < jobs.size(); ++k) {
                try {
                    jobs[k].get();
                } catch (...) {
                }
            }
            throw ExperimentError(seed, e.what());
        }
        ResultRow row = row_template(config);
        row.seed = seed;
        row.metrics = metrics.back();
        rows.push_back(row);
    }
    ResultRow mean = row_template(config);
    mean.kind = RowKind::mean;
    mean.metrics = aggregate(metrics, false);
    rows.push_back(mean);
    ResultRow sd = row_template(config);
    sd.kind = RowKind::stddev;
    sd.metrics = aggregate(metrics, true);
    rows.push_back(sd);
    return rows;
}

std::vector<ResultRow> sweep(const ExperimentConfig& config, const std::vector<LossSpec>& losses,
                             const std::vector<double>& ratios) {
    std::vector<ResultRow> rows;
    for (const auto& loss : losses) {
        for (const double ratio : ratios) {
            ExperimentConfig c = config;
            c.loss = loss;
            c.data.ratio = ratio;
            auto part = run(c);
            rows.insert(rows.end(), part.begin(), part.end());
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ResultRow& a, const ResultRow& b) { return sort_key(a) < sort_key(b); });
    return rows;
}

std::vector<ResultRow> sweep_tversky(const ExperimentConfig& config, const std::vector<double>& alphas) {
    if (config.loss.kind != LossKind::TL) {
        throw ConfigError("sweep_tversky needs loss kind TL");
    }
    std::vector<double> sorted = alphas;
    std::sort(sorted.begin(), sorted.end());
    std::vector<ResultRow> rows;
    for (const double alpha : sorted) {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw ConfigError("tversky alpha must be in (0,1)");
        }
        ExperimentConfig c = config;
        c.loss.alpha = alpha;
        c.loss.beta = 1.0 - alpha;
        auto part = run(c);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::vector<ResultRow> mean_rows(const std::vector<ResultRow>& rows) {
    std::vector<ResultRow> out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
                 [](const ResultRow& r) { return r.kind == RowKind::mean; });
    return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kResultsCsvHeader << '\n';
    char buf[512];
    for (const auto& r : rows) {
        std::string seed;
        switch (r.kind) {
            case RowKind::replicate:
                seed = std::to_string(r.seed);
                break;
            case RowKind::mean:
                seed = "mean";
                break;
            case RowKind::stddev:
                seed = "std";
                break;
        }
        std::snprintf(buf, sizeof buf, "%s,%.6f,%s,%.6f,%.6f,%.6f,%s,%.6f,%.6f,%.6f,%.6f\n",
                      std::string(to_string(r.loss)).c_str(), r.ratio, std::string(to_string(r.transform)).c_str(),
                      r.alpha, r.beta, r.gamma, seed.c_str(), r.metrics.precision, r.metrics.recall, r.metrics.f1,
                      r.metrics.accuracy);
        out << buf;
    }
}

}  // namespace imbalance
