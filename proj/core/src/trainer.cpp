#include "imbalance/trainer.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "imbalance/random.hpp"

namespace imbalance {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_input(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.input_dim) {
        throw std::invalid_argument("feature length " + std::to_string(x.size()) +
                                    " does not match model input dim " + std::to_string(model.input_dim));
    }
}

// Forward pass that keeps hidden activations for backprop.
struct Activations {
    std::vector<double> hidden;
    double p1 = 0.5;
};

Activations forward_full(const TrainedModel& model, std::span<const double> x) {
    const auto& w = model.parameters;
    const std::size_t d = model.input_dim;
    Activations act;
    if (model.model_spec.arch == Arch::linear) {
        double z = w[d];
        for (std::size_t j = 0; j < d; ++j) {
            z += w[j] * x[j];
        }
        act.p1 = sigmoid(z);
        return act;
    }
    const std::size_t h = model.model_spec.hidden_units;
    const double* b1 = w.data() + h * d;
    const double* w2 = b1 + h;
    const double b2 = w2[h];
    act.hidden.resize(h);
    double z = b2;
    for (std::size_t k = 0; k < h; ++k) {
        double a = b1[k];
        for (std::size_t j = 0; j < d; ++j) {
            a += w[k * d + j] * x[j];
        }
        act.hidden[k] = std::tanh(a);
        z += w2[k] * act.hidden[k];
    }
    act.p1 = sigmoid(z);
    return act;
}

// Accumulates dL/dparams given dL/dz at the output logit.
void backward(const TrainedModel& model, std::span<const double> x, const Activations& act, double dz,
              std::vector<double>& grad) {
    const std::size_t d = model.input_dim;
    if (model.model_spec.arch == Arch::linear) {
        for (std::size_t j = 0; j < d; ++j) {
            grad[j] += dz * x[j];
        }
        grad[d] += dz;
        return;
    }
    const std::size_t h = model.model_spec.hidden_units;
    const double* w2 = model.parameters.data() + h * d + h;
    const std::size_t b1_off = h * d;
    const std::size_t w2_off = b1_off + h;
    for (std::size_t k = 0; k < h; ++k) {
        const double hk = act.hidden[k];
        grad[w2_off + k] += dz * hk;
        const double da = dz * w2[k] * (1.0 - hk * hk);
        grad[b1_off + k] += da;
        for (std::size_t j = 0; j < d; ++j) {
            grad[k * d + j] += da * x[j];
        }
    }
    grad[w2_off + h] += dz;
}

ProbPair to_pair(double p1) { return {1.0 - p1, p1}; }

TrainedModel initialize_from(const ModelSpec& spec, std::size_t input_dim, double init_scale, Rng& rng) {
    TrainedModel model;
    model.model_spec = spec;
    model.input_dim = input_dim;
    model.parameters.resize(parameter_count(spec, input_dim));
    for (auto& w : model.parameters) {
        w = init_scale * rng.normal();
    }
    return model;
}

}  // namespace

std::string_view to_string(Arch arch) { return arch == Arch::linear ? "linear" : "mlp"; }

Arch arch_from_string(std::string_view name) {
    if (name == "linear") {
        return Arch::linear;
    }
    if (name == "mlp") {
        return Arch::mlp;
    }
    throw std::invalid_argument("unknown arch '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
    if (arch == Arch::mlp && hidden_units < 1) {
        throw std::invalid_argument("mlp needs hidden_units >= 1");
    }
}

void TrainSpec::validate() const {
    if (!std::isfinite(learning_rate) || learning_rate <= 0.0) {
        throw std::invalid_argument("learning_rate must be positive");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("batch_size must be >= 1");
    }
    if (!std::isfinite(init_scale) || init_scale <= 0.0) {
        throw std::invalid_argument("init_scale must be positive");
    }
}

std::size_t parameter_count(const ModelSpec& spec, std::size_t input_dim) {
    if (spec.arch == Arch::linear) {
        return input_dim + 1;
    }
    return spec.hidden_units * (input_dim + 2) + 1;
}

TrainedModel initialize(const ModelSpec& spec, std::size_t input_dim, const TrainSpec& train_spec) {
    spec.validate();
    train_spec.validate();
    if (input_dim < 1) {
        throw std::invalid_argument("input_dim must be >= 1");
    }
    Rng rng(train_spec.seed);
    return initialize_from(spec, input_dim, train_spec.init_scale, rng);
}

ProbPair forward(const TrainedModel& model, std::span<const double> features) {
    check_input(model, features);
    return to_pair(forward_full(model, features).p1);
}

ObjectiveGrad batch_objective(const TrainedModel& model, const LabeledBatch& data,
                              std::span<const std::size_t> rows, const LossSpec& loss,
                              const std::optional<ClassWeights>& class_weights) {
    std::vector<Activations> acts;
    std::vector<ProbPair> ps;
    std::vector<OneHotLabel> ys;
    acts.reserve(rows.size());
    ps.reserve(rows.size());
    ys.reserve(rows.size());
    for (const std::size_t r : rows) {
        check_input(model, data.features[r]);
        acts.push_back(forward_full(model, data.features[r]));
        if (!std::isfinite(acts.back().p1)) {
            throw TrainingDivergedError("non-finite model output at row " + std::to_string(r));
        }
        ps.push_back(to_pair(acts.back().p1));
        ys.push_back(data.labels[r]);
    }
    const auto lv = batch_mean_loss(loss, ps, ys, class_weights);

    ObjectiveGrad out;
    out.value = lv.value;
    out.gradient.assign(model.parameters.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double p1 = acts[i].p1;
        const double dz = lv.dvalue_dp1[i] * p1 * (1.0 - p1);
        backward(model, data.features[rows[i]], acts[i], dz, out.gradient);
    }
    return out;
}

std::optional<ClassWeights> training_class_weights(const LossSpec& loss, const LabeledBatch& data) {
    if (!loss.uses_class_weights()) {
        return std::nullopt;
    }
    return class_weights_from_counts(data.counts.negative, data.counts.positive, loss.k, loss.log_base);
}

TrainedModel train(const LabeledBatch& data, const LossSpec& loss, const ModelSpec& model_spec,
                   const TrainSpec& train_spec) {
    if (data.empty()) {
        throw std::invalid_argument("train: empty dataset");
    }
    data.validate();
    loss.validate();
    model_spec.validate();
    train_spec.validate();
    const auto weights = training_class_weights(loss, data);

    // One stream: initialization first, then the per-epoch shuffles.
    Rng rng(train_spec.seed);
    TrainedModel model = initialize_from(model_spec, data.feature_dim(), train_spec.init_scale, rng);

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::vector<int> golds = data.golds();
    std::vector<int> preds(n);

    for (std::size_t epoch = 0; epoch < train_spec.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[rng.index(i)]);
        }
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += train_spec.batch_size) {
            const std::size_t len = std::min(train_spec.batch_size, n - start);
            const std::span<const std::size_t> rows(order.data() + start, len);
            ObjectiveGrad og = batch_objective(model, data, rows, loss, weights);
            bool finite = std::isfinite(og.value);
            for (const double g : og.gradient) {
                finite = finite && std::isfinite(g);
            }
            if (!finite) {
                throw TrainingDivergedError("training diverged (non-finite loss or gradient) at epoch " +
                                            std::to_string(epoch + 1) + ", batch starting at " +
                                            std::to_string(start));
            }
            for (std::size_t k = 0; k < og.gradient.size(); ++k) {
                model.parameters[k] -= train_spec.learning_rate * og.gradient[k];
            }
            loss_sum += og.value * static_cast<double>(len);
        }
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = harden(forward(model, data.features[i]));
        }
        model.history.push_back(
            {loss_sum / static_cast<double>(n), metrics_from_counts(confusion(preds, golds)).f1});
    }
    return model;
}

ClassifierMetrics evaluate(const TrainedModel& model, const LabeledBatch& data, double threshold) {
    std::vector<int> preds(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        preds[i] = harden(forward(model, data.features[i]), threshold);
    }
    return metrics_from_counts(confusion(preds, data.golds()));
}

std::string model_to_json(const TrainedModel& model) {
    nlohmann::json j;
    j["arch"] = std::string(to_string(model.model_spec.arch));
    j["hidden_units"] = model.model_spec.hidden_units;
    j["parameters"] = model.parameters;
    auto history = nlohmann::json::array();
    for (const auto& e : model.history) {
        history.push_back({e.mean_loss, e.train_f1});
    }
    j["history"] = std::move(history);
    return j.dump();
}

TrainedModel model_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    TrainedModel model;
    model.model_spec.arch = arch_from_string(j.at("arch").get<std::string>());
    model.model_spec.hidden_units = j.at("hidden_units").get<std::size_t>();
    model.parameters = j.at("parameters").get<std::vector<double>>();
    for (const auto& e : j.at("history")) {
        model.history.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    }
    // Input dimension follows from the parameter count.
    const std::size_t n = model.parameters.size();
    if (model.model_spec.arch == Arch::linear) {
        if (n < 2) {
            throw std::invalid_argument("model json: too few parameters");
        }
        model.input_dim = n - 1;
    } else {
        const std::size_t h = model.model_spec.hidden_units;
        if (h == 0 || n < 1 || (n - 1) % h != 0 || (n - 1) / h < 3) {
            throw std::invalid_argument("model json: parameter count does not fit an mlp");
        }
        model.input_dim = (n - 1) / h - 2;
    }
    return model;
}

}  // namespace imbalance
