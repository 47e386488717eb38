#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "imbalance/loss.hpp"
#include "imbalance/metrics.hpp"
#include "imbalance/synth.hpp"

namespace imbalance {

enum class Arch { linear, mlp };
enum class Activation { tanh };

std::string_view to_string(Arch arch);
Arch arch_from_string(std::string_view name);

struct ModelSpec {
    Arch arch = Arch::linear;
    std::size_t hidden_units = 16;
    Activation activation = Activation::tanh;

    void validate() const;
    bool operator==(const ModelSpec&) const = default;
};

struct TrainSpec {
    double learning_rate = 0.1;
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    double init_scale = 0.1;

    void validate() const;
    bool operator==(const TrainSpec&) const = default;
};

struct EpochStats {
    double mean_loss = 0.0;
    double train_f1 = 0.0;
    bool operator==(const EpochStats&) const = default;
};

/// Flat parameter layout:
///   linear: w[0..d), b
///   mlp:    W1[h][d] row-major, b1[h], w2[h], b2
struct TrainedModel {
    std::vector<double> parameters;
    ModelSpec model_spec;
    std::size_t input_dim = 0;
    std::vector<EpochStats> history;

    bool operator==(const TrainedModel&) const = default;
};

class TrainingDivergedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t parameter_count(const ModelSpec& spec, std::size_t input_dim);

/// Parameters drawn i.i.d. from N(0, init_scale^2) using the train seed.
TrainedModel initialize(const ModelSpec& spec, std::size_t input_dim, const TrainSpec& train_spec);

ProbPair forward(const TrainedModel& model, std::span<const double> features);

/// Loss over the selected rows and its gradient w.r.t. every parameter.
struct ObjectiveGrad {
    double value = 0.0;
    std::vector<double> gradient;
};

ObjectiveGrad batch_objective(const TrainedModel& model, const LabeledBatch& data,
                              std::span<const std::size_t> rows, const LossSpec& loss,
                              const std::optional<ClassWeights>& class_weights);

/// Class weights the trainer uses for `loss` on `data`; empty unless WCE/FL.
std::optional<ClassWeights> training_class_weights(const LossSpec& loss, const LabeledBatch& data);

/// Mini-batch SGD. Each epoch reshuffles with the seeded stream, steps once
/// per mini-batch and records (epoch-mean loss, train F1 at 0.5).
TrainedModel train(const LabeledBatch& data, const LossSpec& loss, const ModelSpec& model_spec,
                   const TrainSpec& train_spec);

ClassifierMetrics evaluate(const TrainedModel& model, const LabeledBatch& data, double threshold = 0.5);

/// {"arch", "hidden_units", "parameters": [...], "history": [[loss, f1], ...]}
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view json);

}  // namespace imbalance
