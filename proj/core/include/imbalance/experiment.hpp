#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "imbalance/loss.hpp"
#include "imbalance/metrics.hpp"
#include "imbalance/synth.hpp"
#include "imbalance/trainer.hpp"

namespace imbalance {

/// One experiment: how to build the training set, which loss to train with,
/// and the replicate seeds to average over.
///
/// Per replicate seed `s`, the training data seed, transform seed and trainer
/// seed are derive_seed(base, s) of the corresponding base seeds here. The
/// held-out test set is the untransformed recipe with seed `data.seed + 1`
/// and 20% of the positives (same ratio), shared by every replicate.
struct ExperimentConfig {
    DataSpec data;
    TransformSpec transform;
    LossSpec loss;
    ModelSpec model;
    TrainSpec train;
    double eval_threshold = 0.5;
    std::vector<std::uint64_t> replicate_seeds{1, 2, 3, 4, 5};

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Bad configuration content; maps to the CLI usage exit code.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A training failure tagged with the replicate seed that produced it.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(std::uint64_t seed, const std::string& what);
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

std::string config_to_json(const ExperimentConfig& config);
/// Missing fields take defaults (loss hyperparameters default per kind);
/// unknown fields and ill-typed values raise ConfigError.
ExperimentConfig config_from_json(std::string_view json);

enum class RowKind { replicate, mean, stddev };

struct ResultRow {
    LossKind loss = LossKind::CE;
    double ratio = 1.0;
    TransformKind transform = TransformKind::original;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    RowKind kind = RowKind::replicate;
    std::uint64_t seed = 0;  // meaningful for replicate rows only
    ClassifierMetrics metrics;

    bool operator==(const ResultRow&) const = default;
};

DataSpec test_data_spec(const DataSpec& train_spec);

/// Trains and evaluates one replicate.
ClassifierMetrics run_replicate(const ExperimentConfig& config, const LabeledBatch& test_set,
                                std::uint64_t replicate_seed);

/// Per-seed rows in seed order, then a mean row and a (sample) stddev row.
/// Replicates run concurrently; the result does not depend on scheduling.
std::vector<ResultRow> run(const ExperimentConfig& config);

/// Every loss spec crossed with every ratio; rows ordered by (loss kind,
/// ratio, alpha, row).
std::vector<ResultRow> sweep(const ExperimentConfig& config, const std::vector<LossSpec>& losses,
                             const std::vector<double>& ratios);

/// Tversky runs with beta = 1 - alpha for each alpha in (0,1), ordered by alpha.
std::vector<ResultRow> sweep_tversky(const ExperimentConfig& config, const std::vector<double>& alphas);

/// Aggregate rows only (mean), in input order.
std::vector<ResultRow> mean_rows(const std::vector<ResultRow>& rows);

inline constexpr std::string_view kResultsCsvHeader =
    "loss,ratio,transform,alpha,beta,gamma,seed,precision,recall,f1,accuracy";

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace imbalance
