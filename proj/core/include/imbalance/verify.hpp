#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "imbalance/loss.hpp"

namespace imbalance {

inline constexpr double kFiniteDiffStep = 1e-6;
inline constexpr double kGradRelTolerance = 1e-5;
inline constexpr double kGradAbsTolerance = 1e-8;

/// Central difference of the loss value in p1, using value functions only.
/// Within h of 0 or 1 it switches to the second-order one-sided stencil
/// (-3 L(p) + 4 L(p+s) - L(p+2s)) / (2s) that stays inside [0,1]. Throws
/// std::invalid_argument when no stencil fits (h <= 0 or 2h > 1).
/// For DSC_selfadj with detach_weight the decay factor is frozen at p1, so
/// the oracle differentiates 1 - dice_coefficient_sample at (1-p1)^alpha * x.
double finite_diff_grad(const LossSpec& spec, double p1, const OneHotLabel& y,
                        double h = kFiniteDiffStep, double class_weight = 1.0);

/// Central differences of the set-level dice loss w.r.t. every p1 in the batch.
std::vector<double> finite_diff_set_grad(const LossSpec& spec, std::span<const ProbPair> ps,
                                         std::span<const OneHotLabel> ys, double h = kFiniteDiffStep);

/// One gradient-check sample. For DL_set the checked coordinate is
/// `set_index` of the batch (`set_p1`, `set_y1`), and p1/y1 mirror it.
struct GradCheckInput {
    double p1 = 0.5;
    int y1 = 0;
    LossSpec spec;
    double class_weight = 1.0;
    std::vector<double> set_p1;
    std::vector<int> set_y1;
    std::size_t set_index = 0;
};

/// Worst-case agreement between analytic and finite-difference gradients.
/// A sample passes if its absolute error is below the absolute tolerance or
/// its relative error |a - n| / max(|a|, |n|) is below the relative one;
/// `max_rel_error` is taken over samples that did not pass on the absolute
/// criterion.
struct GradCheckReport {
    LossKind loss_kind = LossKind::CE;
    std::size_t sample_count = 0;
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    GradCheckInput worst_input;
    bool passed = true;
};

/// Analytic gradient provider; the default is the library's closed forms.
/// Tests substitute a corrupted one to make sure the checker notices.
using AnalyticGradFn = std::function<double(const GradCheckInput&)>;
double analytic_grad(const GradCheckInput& in);

/// Sweeps every loss kind over random p1 in [0.01, 0.99], both labels, and
/// randomized hyperparameters (gamma in [0.1, 2], alpha, beta in [0, 2],
/// K in [1, 10]). DL_set samples are random batches of one to eight
/// examples with one random coordinate checked per sample.
std::vector<GradCheckReport> gradcheck_all(std::size_t samples_per_loss, std::uint64_t seed,
                                           const AnalyticGradFn& analytic = analytic_grad);

std::string gradcheck_to_json(const std::vector<GradCheckReport>& reports);

struct ThresholdF1 {
    double threshold = 0.5;
    double f1 = 0.0;
};

/// Exhaustive search over every achievable hardening: thresholds 0.5, each
/// distinct p1 value, and the double just below each distinct p1. Ties go to
/// the threshold nearest 0.5.
ThresholdF1 brute_force_best_threshold_f1(std::span<const ProbPair> ps, std::span<const int> golds);

}  // namespace imbalance
