#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace imbalance {

/// Lower/upper clamp applied to probabilities before any logarithm.
inline constexpr double kProbEpsilon = 1e-7;

/// Thrown when a dice-family ratio has a zero denominator (gamma = 0 with
/// no mass in the denominator). Not clamped: it signals a misconfiguration.
class SingularInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Per-example failure inside a batch loss; carries the offending index.
class BatchLossError : public std::invalid_argument {
public:
    BatchLossError(std::size_t index, const std::string& what);
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Predicted distribution over {negative, positive}.
struct ProbPair {
    double p0 = 0.5;
    double p1 = 0.5;

    /// Builds (1 - p1, p1); throws std::invalid_argument for NaN or out of [0,1].
    static ProbPair from_p1(double p1);

    /// Throws std::invalid_argument unless both entries are in [0,1] and sum to 1.
    void validate() const;

    bool operator==(const ProbPair&) const = default;
};

struct OneHotLabel {
    int y0 = 1;
    int y1 = 0;

    static constexpr OneHotLabel positive() { return {0, 1}; }
    static constexpr OneHotLabel negative() { return {1, 0}; }
    static OneHotLabel from_class(int cls);

    [[nodiscard]] bool is_positive() const noexcept { return y1 == 1; }
    void validate() const;

    bool operator==(const OneHotLabel&) const = default;
};

enum class LossKind { CE, WCE, DL_sample, DL_set, TL, DSC_selfadj, FL };

inline constexpr LossKind kAllLossKinds[] = {
    LossKind::CE, LossKind::WCE,         LossKind::DL_sample, LossKind::DL_set,
    LossKind::TL, LossKind::DSC_selfadj, LossKind::FL,
};

std::string_view to_string(LossKind kind);
/// Inverse of to_string; throws std::invalid_argument for unknown names.
LossKind loss_kind_from_string(std::string_view name);

/// Loss kind plus hyperparameters.
///
/// `alpha` is the Tversky false-positive weight for TL and the decay exponent
/// for DSC_selfadj. `gamma` is the additive smoothing term for the dice family
/// and the focusing exponent for FL. `k` and `log_base` shape the class
/// coefficient used by WCE and FL.
struct LossSpec {
    LossKind kind = LossKind::CE;
    double alpha = 1.0;
    double beta = 0.5;
    double gamma = 1.0;
    double k = 1.0;
    bool detach_weight = false;
    double log_base = 10.0;

    /// Hyperparameter defaults for a kind: dice family gamma = 1, TL alpha =
    /// beta = 0.5, DSC_selfadj alpha = 1, FL focusing exponent 2.
    static LossSpec defaults_for(LossKind kind);

    /// Throws std::invalid_argument on negative/non-finite hyperparameters.
    void validate() const;

    [[nodiscard]] bool uses_class_weights() const noexcept {
        return kind == LossKind::WCE || kind == LossKind::FL;
    }

    bool operator==(const LossSpec&) const = default;
};

struct LossValueGrad {
    double value = 0.0;
    double dvalue_dp1 = 0.0;
};

/// Batch loss value with the gradient of that value with respect to each
/// example's p1. For mean-reduced kinds each entry already includes 1/N.
struct BatchLossValueGrad {
    double value = 0.0;
    std::vector<double> dvalue_dp1;
};

/// Per-class weights for WCE/FL, indexed by the gold class.
struct ClassWeights {
    double negative = 1.0;
    double positive = 1.0;

    [[nodiscard]] double for_label(const OneHotLabel& y) const noexcept {
        return y.is_positive() ? positive : negative;
    }
    bool operator==(const ClassWeights&) const = default;
};

LossValueGrad ce_loss(const ProbPair& p, const OneHotLabel& y);
LossValueGrad wce_loss(const ProbPair& p, const OneHotLabel& y, double class_weight);

/// log_base((n_total - n_class) / n_class + k).
double wce_class_coefficient(double n_total, double n_class, double k, double log_base = 10.0);

/// Coefficients for both classes from whole-dataset counts.
ClassWeights class_weights_from_counts(std::size_t n_negative, std::size_t n_positive,
                                       double k, double log_base = 10.0);

/// Smoothed per-example dice coefficient (2 p1 y1 + gamma) / (p1 + y1 + gamma).
double dice_coefficient_sample(const ProbPair& p, const OneHotLabel& y, double gamma);

/// Dice loss with squared denominator.
LossValueGrad dl_sample_loss(const ProbPair& p, const OneHotLabel& y, double gamma);

/// Set-level dice loss over a whole batch; gradients share one denominator.
BatchLossValueGrad dl_set_loss(std::span<const ProbPair> ps, std::span<const OneHotLabel> ys,
                               double gamma);

LossValueGrad tversky_loss(const ProbPair& p, const OneHotLabel& y, double alpha, double beta,
                           double gamma);

/// Self-adjusting dice loss: p1 is replaced by (1 - p1)^alpha * p1. With
/// `detach_weight` the factor (1 - p1)^alpha is held constant in the gradient;
/// the value is identical under both settings.
LossValueGrad dsc_selfadj_loss(const ProbPair& p, const OneHotLabel& y, double alpha,
                               double gamma, bool detach_weight);

LossValueGrad focal_loss(const ProbPair& p, const OneHotLabel& y, double gamma_focus,
                         double class_weight);

/// Dispatches one example for every kind except DL_set (which is a batch
/// loss; a singleton set is used if asked). `class_weight` is ignored by
/// kinds that do not take one.
LossValueGrad sample_loss(const LossSpec& spec, const ProbPair& p, const OneHotLabel& y,
                          double class_weight = 1.0);

/// Mean of the per-example losses, or the set-level dice for DL_set.
/// `class_weights` must be present iff the kind is WCE or FL.
BatchLossValueGrad batch_mean_loss(const LossSpec& spec, std::span<const ProbPair> ps,
                                   std::span<const OneHotLabel> ys,
                                   const std::optional<ClassWeights>& class_weights = {});

/// Multi-class loss value with gradient w.r.t. every probability entry.
struct MulticlassLossGrad {
    double value = 0.0;
    std::vector<std::vector<double>> dvalue_dprob;  // [example][class]
};

/// Multi-class extension. CE/WCE/FL use -log p_gold natively (weights indexed
/// by class). Dice-family kinds are computed one-vs-rest for every class
/// except background class 0 and averaged over those classes.
MulticlassLossGrad multiclass_loss(const LossSpec& spec,
                                   std::span<const std::vector<double>> probs,
                                   std::span<const int> golds,
                                   std::span<const double> class_weights = {});

}  // namespace imbalance
