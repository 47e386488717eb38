#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "imbalance/loss.hpp"

namespace imbalance {

/// Synthetic dataset recipe. Positives sit around (+1,...,+1), easy negatives
/// around (-2,...,-2) and hard negatives around (+0.5,...,+0.5), all with
/// isotropic sigma 0.5.
struct DataSpec {
    std::size_t n_positive = 200;
    double ratio = 1.0;  // negatives per positive
    double easy_negative_fraction = 0.9;
    std::size_t feature_dim = 2;
    std::uint64_t seed = 0;
    double jitter_sigma = 0.1;

    [[nodiscard]] std::size_t n_negative() const;
    [[nodiscard]] std::size_t n_easy_negative() const;
    void validate() const;

    bool operator==(const DataSpec&) const = default;
};

inline constexpr double kPositiveCenter = 1.0;
inline constexpr double kEasyNegativeCenter = -2.0;
inline constexpr double kHardNegativeCenter = 0.5;
inline constexpr double kClusterSigma = 0.5;

/// Neg:pos ratios of common imbalanced NLP tasks.
struct RatioPreset {
    std::string_view name;
    double ratio;
};
inline constexpr RatioPreset kRatioPresets[] = {
    {"conll03", 4.98}, {"ontonotes5", 8.18}, {"squad1", 55.9}, {"squad2", 82.0}, {"quoref", 169.0},
};
/// Throws std::invalid_argument for an unknown preset name.
double ratio_preset(std::string_view name);

struct ClassCounts {
    std::size_t negative = 0;
    std::size_t positive = 0;

    [[nodiscard]] std::size_t total() const noexcept { return negative + positive; }
    bool operator==(const ClassCounts&) const = default;
};

struct LabeledBatch {
    std::vector<std::vector<double>> features;
    std::vector<OneHotLabel> labels;
    ClassCounts counts;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] bool empty() const noexcept { return labels.empty(); }
    [[nodiscard]] std::size_t feature_dim() const noexcept {
        return features.empty() ? 0 : features.front().size();
    }
    [[nodiscard]] double positive_fraction() const noexcept;
    /// Gold classes as 0/1.
    [[nodiscard]] std::vector<int> golds() const;

    void push_back(std::vector<double> x, OneHotLabel y);
    /// Recomputes `counts` from `labels`.
    void recount();
    /// Checks lengths, feature dims and counts; throws std::invalid_argument.
    void validate() const;

    bool operator==(const LabeledBatch&) const = default;
};

LabeledBatch generate(const DataSpec& spec);

enum class TransformKind { original, add_positive, add_negative, downsample_negative, add_both };

std::string_view to_string(TransformKind kind);
TransformKind transform_kind_from_string(std::string_view name);

/// Resampling recipe. `target_fraction_positive` drives add_positive,
/// add_negative and downsample_negative; `growth_factor` (>= 1) drives
/// add_both, which keeps class fractions fixed.
struct TransformSpec {
    TransformKind kind = TransformKind::original;
    double target_fraction_positive = 0.5;
    double growth_factor = 1.25;
    std::uint64_t seed = 0;
    double jitter_sigma = 0.1;

    bool operator==(const TransformSpec&) const = default;
};

/// Thrown when a transform cannot reach its target from the given batch.
class InfeasibleTransformError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Augmentation duplicates uniformly drawn examples of a class with Gaussian
/// feature jitter and appends them; downsampling removes random negatives and
/// keeps the relative order of the survivors.
LabeledBatch transform(const LabeledBatch& batch, const TransformSpec& spec);

/// Header `f0,...,f{d-1},label`, floats with 9 significant digits.
void write_csv(std::ostream& out, const LabeledBatch& batch);
LabeledBatch read_csv(std::istream& in);

}  // namespace imbalance
