#include "imbalance/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace imbalance {

namespace {

void require_finite_nonneg(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw std::invalid_argument(std::string(name) + " must be finite and >= 0, got " +
                                    std::to_string(value));
    }
}

double clamp_prob(double p) { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

void check_pair(const ProbPair& p, const OneHotLabel& y) {
    p.validate();
    y.validate();
}

// 1 - num/den and its derivative given d(num)/dp and d(den)/dp.
LossValueGrad one_minus_ratio(double num, double den, double dnum, double dden) {
    return {1.0 - num / den, -(dnum * den - num * dden) / (den * den)};
}

void require_nonsingular(double den, const char* what) {
    if (!(den > 0.0)) {
        throw SingularInputError(std::string(what) + ": zero denominator (gamma = 0 with no mass)");
    }
}

constexpr std::array<std::string_view, 7> kKindNames = {
    "CE", "WCE", "DL_sample", "DL_set", "TL", "DSC_selfadj", "FL",
};

}  // namespace

BatchLossError::BatchLossError(std::size_t index, const std::string& what)
    : std::invalid_argument("example " + std::to_string(index) + ": " + what), index_(index) {}

ProbPair ProbPair::from_p1(double p1) {
    ProbPair p{1.0 - p1, p1};
    p.validate();
    return p;
}

void ProbPair::validate() const {
    if (std::isnan(p0) || std::isnan(p1)) {
        throw std::invalid_argument("probability is NaN");
    }
    if (p0 < 0.0 || p0 > 1.0 || p1 < 0.0 || p1 > 1.0) {
        throw std::invalid_argument("probability outside [0,1]");
    }
    if (std::abs(p0 + p1 - 1.0) > 1e-12) {
        throw std::invalid_argument("p0 + p1 must equal 1");
    }
}

OneHotLabel OneHotLabel::from_class(int cls) {
    if (cls != 0 && cls != 1) {
        throw std::invalid_argument("binary class must be 0 or 1, got " + std::to_string(cls));
    }
    return cls == 1 ? positive() : negative();
}

void OneHotLabel::validate() const {
    const bool ok = (y0 == 0 || y0 == 1) && (y1 == 0 || y1 == 1) && y0 + y1 == 1;
    if (!ok) {
        throw std::invalid_argument("label must be one-hot over two classes");
    }
}

std::string_view to_string(LossKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

LossKind loss_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) {
            return static_cast<LossKind>(i);
        }
    }
    throw std::invalid_argument("unknown loss kind '" + std::string(name) + "'");
}

LossSpec LossSpec::defaults_for(LossKind kind) {
    LossSpec spec;
    spec.kind = kind;
    switch (kind) {
        case LossKind::TL:
            spec.alpha = 0.5;
            spec.beta = 0.5;
            break;
        case LossKind::FL:
            spec.gamma = 2.0;
            break;
        default:
            break;
    }
    return spec;
}

void LossSpec::validate() const {
    require_finite_nonneg(alpha, "alpha");
    require_finite_nonneg(beta, "beta");
    require_finite_nonneg(gamma, "gamma");
    if (!std::isfinite(k) || k <= 0.0) {
        throw std::invalid_argument("k must be positive");
    }
    if (!std::isfinite(log_base) || log_base <= 0.0 || log_base == 1.0) {
        throw std::invalid_argument("log_base must be positive and != 1");
    }
}

LossValueGrad ce_loss(const ProbPair& p, const OneHotLabel& y) {
    check_pair(p, y);
    const double p1 = clamp_prob(p.p1);
    const double p0 = 1.0 - p1;
    if (y.is_positive()) {
        return {-std::log(p1), -1.0 / p1};
    }
    return {-std::log(p0), 1.0 / p0};
}

LossValueGrad wce_loss(const ProbPair& p, const OneHotLabel& y, double class_weight) {
    require_finite_nonneg(class_weight, "class_weight");
    const auto ce = ce_loss(p, y);
    return {class_weight * ce.value, class_weight * ce.dvalue_dp1};
}

double wce_class_coefficient(double n_total, double n_class, double k, double log_base) {
    if (!(n_class > 0.0) || n_class > n_total) {
        throw std::invalid_argument("wce_class_coefficient: need 0 < n_class <= n_total");
    }
    const double arg = (n_total - n_class) / n_class + k;
    if (!(arg > 0.0)) {
        throw std::invalid_argument("wce_class_coefficient: logarithm argument must be > 0");
    }
    if (log_base == 10.0) {
        return std::log10(arg);
    }
    return std::log(arg) / std::log(log_base);
}

ClassWeights class_weights_from_counts(std::size_t n_negative, std::size_t n_positive, double k,
                                       double log_base) {
    const auto total = static_cast<double>(n_negative + n_positive);
    return {wce_class_coefficient(total, static_cast<double>(n_negative), k, log_base),
            wce_class_coefficient(total, static_cast<double>(n_positive), k, log_base)};
}

double dice_coefficient_sample(const ProbPair& p, const OneHotLabel& y, double gamma) {
    check_pair(p, y);
    require_finite_nonneg(gamma, "gamma");
    const double den = p.p1 + y.y1 + gamma;
    require_nonsingular(den, "dice_coefficient_sample");
    return (2.0 * p.p1 * y.y1 + gamma) / den;
}

LossValueGrad dl_sample_loss(const ProbPair& p, const OneHotLabel& y, double gamma) {
    check_pair(p, y);
    require_finite_nonneg(gamma, "gamma");
    const double p1 = p.p1;
    const double y1 = y.y1;
    const double den = p1 * p1 + y1 * y1 + gamma;
    require_nonsingular(den, "dl_sample_loss");
    return one_minus_ratio(2.0 * p1 * y1 + gamma, den, 2.0 * y1, 2.0 * p1);
}

BatchLossValueGrad dl_set_loss(std::span<const ProbPair> ps, std::span<const OneHotLabel> ys,
                               double gamma) {
    if (ps.empty()) {
        throw std::invalid_argument("dl_set_loss: empty batch");
    }
    if (ps.size() != ys.size()) {
        throw std::invalid_argument("dl_set_loss: predictions and labels differ in length");
    }
    require_finite_nonneg(gamma, "gamma");

    double inter = 0.0;
    double sum_p2 = 0.0;
    double sum_y2 = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        try {
            check_pair(ps[i], ys[i]);
        } catch (const std::invalid_argument& e) {
            throw BatchLossError(i, e.what());
        }
        inter += ps[i].p1 * ys[i].y1;
        sum_p2 += ps[i].p1 * ps[i].p1;
        sum_y2 += ys[i].y1;
    }
    const double num = 2.0 * inter + gamma;
    const double den = sum_p2 + sum_y2 + gamma;
    require_nonsingular(den, "dl_set_loss");

    BatchLossValueGrad out;
    out.value = 1.0 - num / den;
    out.dvalue_dp1.resize(ps.size());
    const double den2 = den * den;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double dnum = 2.0 * ys[i].y1;
        const double dden = 2.0 * ps[i].p1;
        out.dvalue_dp1[i] = -(dnum * den - num * dden) / den2;
    }
    return out;
}

LossValueGrad tversky_loss(const ProbPair& p, const OneHotLabel& y, double alpha, double beta,
                           double gamma) {
    check_pair(p, y);
    require_finite_nonneg(alpha, "alpha");
    require_finite_nonneg(beta, "beta");
    require_finite_nonneg(gamma, "gamma");
    const double p1 = p.p1;
    const double p0 = p.p0;
    const double y0 = y.y0;
    const double y1 = y.y1;
    const double num = p1 * y1 + gamma;
    const double den = p1 * y1 + alpha * p1 * y0 + beta * p0 * y1 + gamma;
    require_nonsingular(den, "tversky_loss");
    // p0 = 1 - p1, so d(beta p0 y1)/dp1 = -beta y1.
    return one_minus_ratio(num, den, y1, y1 + alpha * y0 - beta * y1);
}

LossValueGrad dsc_selfadj_loss(const ProbPair& p, const OneHotLabel& y, double alpha,
                               double gamma, bool detach_weight) {
    check_pair(p, y);
    require_finite_nonneg(alpha, "alpha");
    require_finite_nonneg(gamma, "gamma");
    const double p1 = p.p1;
    const double y1 = y.y1;
    const double weight = std::pow(1.0 - p1, alpha);
    const double q = weight * p1;
    const double num = 2.0 * q * y1 + gamma;
    const double den = q + y1 + gamma;
    require_nonsingular(den, "dsc_selfadj_loss");

    double dq = weight;
    if (!detach_weight && alpha != 0.0) {
        // d/dp (1-p)^alpha = -alpha (1-p)^(alpha-1); only singular at p = 1 for alpha < 1.
        const double base = alpha < 1.0 ? std::max(1.0 - p1, kProbEpsilon) : 1.0 - p1;
        dq -= p1 * alpha * std::pow(base, alpha - 1.0);
    }
    return one_minus_ratio(num, den, 2.0 * y1 * dq, dq);
}

LossValueGrad focal_loss(const ProbPair& p, const OneHotLabel& y, double gamma_focus,
                         double class_weight) {
    check_pair(p, y);
    require_finite_nonneg(gamma_focus, "gamma_focus");
    require_finite_nonneg(class_weight, "class_weight");
    const double p1 = clamp_prob(p.p1);
    const double p0 = 1.0 - p1;
    if (y.is_positive()) {
        // -(1-p1)^g log p1
        const double mod = std::pow(p0, gamma_focus);
        const double log_p = std::log(p1);
        const double dmod = gamma_focus == 0.0 ? 0.0 : -gamma_focus * std::pow(p0, gamma_focus - 1.0);
        return {-class_weight * mod * log_p, -class_weight * (dmod * log_p + mod / p1)};
    }
    // -(p1)^g log(1-p1)
    const double mod = std::pow(p1, gamma_focus);
    const double log_p = std::log(p0);
    const double dmod = gamma_focus == 0.0 ? 0.0 : gamma_focus * std::pow(p1, gamma_focus - 1.0);
    return {-class_weight * mod * log_p, -class_weight * (dmod * log_p - mod / p0)};
}

LossValueGrad sample_loss(const LossSpec& spec, const ProbPair& p, const OneHotLabel& y,
                          double class_weight) {
    switch (spec.kind) {
        case LossKind::CE:
            return ce_loss(p, y);
        case LossKind::WCE:
            return wce_loss(p, y, class_weight);
        case LossKind::DL_sample:
            return dl_sample_loss(p, y, spec.gamma);
        case LossKind::DL_set: {
            const auto set = dl_set_loss(std::span(&p, 1), std::span(&y, 1), spec.gamma);
            return {set.value, set.dvalue_dp1.front()};
        }
        case LossKind::TL:
            return tversky_loss(p, y, spec.alpha, spec.beta, spec.gamma);
        case LossKind::DSC_selfadj:
            return dsc_selfadj_loss(p, y, spec.alpha, spec.gamma, spec.detach_weight);
        case LossKind::FL:
            return focal_loss(p, y, spec.gamma, class_weight);
    }
    throw std::invalid_argument("unhandled loss kind");
}

BatchLossValueGrad batch_mean_loss(const LossSpec& spec, std::span<const ProbPair> ps,
                                   std::span<const OneHotLabel> ys,
                                   const std::optional<ClassWeights>& class_weights) {
    if (ps.empty()) {
        throw std::invalid_argument("batch_mean_loss: empty batch");
    }
    if (ps.size() != ys.size()) {
        throw std::invalid_argument("batch_mean_loss: predictions and labels differ in length");
    }
    if (spec.uses_class_weights() != class_weights.has_value()) {
        throw std::invalid_argument(std::string("batch_mean_loss: class weights are required for "
                                                "WCE/FL and not accepted for ") +
                                    std::string(to_string(spec.kind)));
    }
    if (spec.kind == LossKind::DL_set) {
        return dl_set_loss(ps, ys, spec.gamma);
    }

    const double inv_n = 1.0 / static_cast<double>(ps.size());
    BatchLossValueGrad out;
    out.dvalue_dp1.resize(ps.size());
    double total = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        LossValueGrad r;
        try {
            const double w = class_weights ? class_weights->for_label(ys[i]) : 1.0;
            r = sample_loss(spec, ps[i], ys[i], w);
        } catch (const SingularInputError& e) {
            throw BatchLossError(i, e.what());
        } catch (const std::invalid_argument& e) {
            throw BatchLossError(i, e.what());
        }
        total += r.value;
        out.dvalue_dp1[i] = r.dvalue_dp1 * inv_n;
    }
    out.value = total * inv_n;
    return out;
}

MulticlassLossGrad multiclass_loss(const LossSpec& spec,
                                   std::span<const std::vector<double>> probs,
                                   std::span<const int> golds, std::span<const double> class_weights) {
    if (probs.empty() || probs.size() != golds.size()) {
        throw std::invalid_argument("multiclass_loss: need equal non-empty inputs");
    }
    const std::size_t n = probs.size();
    const std::size_t classes = probs.front().size();
    if (classes < 2) {
        throw std::invalid_argument("multiclass_loss: need at least two classes");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (probs[i].size() != classes) {
            throw BatchLossError(i, "inconsistent class count");
        }
        if (golds[i] < 0 || static_cast<std::size_t>(golds[i]) >= classes) {
            throw BatchLossError(i, "gold class out of range");
        }
    }
    if (spec.uses_class_weights() && class_weights.size() != classes) {
        throw std::invalid_argument("multiclass_loss: WCE/FL need one weight per class");
    }

    MulticlassLossGrad out;
    out.dvalue_dprob.assign(n, std::vector<double>(classes, 0.0));
    const double inv_n = 1.0 / static_cast<double>(n);

    if (spec.kind == LossKind::CE || spec.kind == LossKind::WCE || spec.kind == LossKind::FL) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto g = static_cast<std::size_t>(golds[i]);
            const double w = spec.kind == LossKind::CE ? 1.0 : class_weights[g];
            const double focus = spec.kind == LossKind::FL ? spec.gamma : 0.0;
            // The gold entry viewed as the positive class of a binary pair.
            LossValueGrad r;
            try {
                r = focal_loss(ProbPair::from_p1(probs[i][g]), OneHotLabel::positive(), focus, w);
            } catch (const std::invalid_argument& e) {
                throw BatchLossError(i, e.what());
            }
            out.value += r.value * inv_n;
            out.dvalue_dprob[i][g] = r.dvalue_dp1 * inv_n;
        }
        return out;
    }

    const double inv_c = 1.0 / static_cast<double>(classes - 1);
    std::vector<ProbPair> ps(n);
    std::vector<OneHotLabel> ys(n);
    for (std::size_t c = 1; c < classes; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                ps[i] = ProbPair::from_p1(probs[i][c]);
            } catch (const std::invalid_argument& e) {
                throw BatchLossError(i, e.what());
            }
            ys[i] = OneHotLabel::from_class(static_cast<std::size_t>(golds[i]) == c ? 1 : 0);
        }
        const auto r = batch_mean_loss(spec, ps, ys);
        out.value += r.value * inv_c;
        for (std::size_t i = 0; i < n; ++i) {
            out.dvalue_dprob[i][c] += r.dvalue_dp1[i] * inv_c;
        }
    }
    return out;
}

}  // namespace imbalance
