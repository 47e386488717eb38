#include "imbalance/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "imbalance/metrics.hpp"
#include "imbalance/random.hpp"

namespace imbalance {

namespace {

// d/dx of f at x by central differences, or a one-sided second-order stencil
// pointing into [0,1] when the central one would leave it.
template <class F>
double stencil(F&& f, double x, double h) {
    if (!(h > 0.0) || 2.0 * h > 1.0) {
        throw std::invalid_argument("finite difference step must be in (0, 0.5]");
    }
    if (x < 0.0 || x > 1.0) {
        throw std::invalid_argument("finite difference point outside [0,1]");
    }
    if (x - h >= 0.0 && x + h <= 1.0) {
        return (f(x + h) - f(x - h)) / (2.0 * h);
    }
    const double s = x - h < 0.0 ? h : -h;
    return (-3.0 * f(x) + 4.0 * f(x + s) - f(x + 2.0 * s)) / (2.0 * s);
}

double set_value(const LossSpec& spec, const std::vector<ProbPair>& ps, const std::vector<OneHotLabel>& ys) {
    return dl_set_loss(ps, ys, spec.gamma).value;
}

double set_coordinate_fd(const LossSpec& spec, std::vector<ProbPair> ps, const std::vector<OneHotLabel>& ys,
                         std::size_t index, double h) {
    return stencil(
        [&](double x) {
            ps[index] = ProbPair{1.0 - x, x};
            return set_value(spec, ps, ys);
        },
        ps[index].p1, h);
}

std::vector<ProbPair> pairs_of(const std::vector<double>& p1s) {
    std::vector<ProbPair> out;
    out.reserve(p1s.size());
    for (double p : p1s) {
        out.push_back(ProbPair{1.0 - p, p});
    }
    return out;
}

std::vector<OneHotLabel> labels_of(const std::vector<int>& y1s) {
    std::vector<OneHotLabel> out;
    out.reserve(y1s.size());
    for (int y : y1s) {
        out.push_back(OneHotLabel::from_class(y));
    }
    return out;
}

double numeric_grad(const GradCheckInput& in) {
    if (in.spec.kind == LossKind::DL_set && !in.set_p1.empty()) {
        return set_coordinate_fd(in.spec, pairs_of(in.set_p1), labels_of(in.set_y1), in.set_index,
                                 kFiniteDiffStep);
    }
    return finite_diff_grad(in.spec, in.p1, OneHotLabel::from_class(in.y1), kFiniteDiffStep, in.class_weight);
}

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

GradCheckInput draw_input(LossKind kind, Rng& rng) {
    GradCheckInput in;
    in.spec = LossSpec::defaults_for(kind);
    in.spec.gamma = uniform_in(rng, 0.1, 2.0);
    in.spec.alpha = uniform_in(rng, 0.0, 2.0);
    in.spec.beta = uniform_in(rng, 0.0, 2.0);
    in.spec.k = uniform_in(rng, 1.0, 10.0);
    in.spec.detach_weight = rng.uniform() < 0.5;
    // Coefficient for a random imbalance of up to 200:1.
    in.class_weight = wce_class_coefficient(1.0 + uniform_in(rng, 0.0, 200.0), 1.0, in.spec.k);
    in.p1 = uniform_in(rng, 0.01, 0.99);
    in.y1 = rng.uniform() < 0.5 ? 1 : 0;
    if (kind == LossKind::DL_set) {
        const std::size_t n = 1 + rng.index(8);
        for (std::size_t i = 0; i < n; ++i) {
            in.set_p1.push_back(uniform_in(rng, 0.01, 0.99));
            in.set_y1.push_back(rng.uniform() < 0.5 ? 1 : 0);
        }
        in.set_index = rng.index(n);
        in.p1 = in.set_p1[in.set_index];
        in.y1 = in.set_y1[in.set_index];
    }
    return in;
}

}  // namespace

double finite_diff_grad(const LossSpec& spec, double p1, const OneHotLabel& y, double h, double class_weight) {
    if (spec.kind == LossKind::DSC_selfadj && spec.detach_weight) {
        // Frozen weight c: the loss is 1 - DSC(c x) in the plain smoothed dice.
        const double c = std::pow(1.0 - p1, spec.alpha);
        return stencil(
            [&](double x) {
                const double q = c * x;
                return 1.0 - dice_coefficient_sample(ProbPair{1.0 - q, q}, y, spec.gamma);
            },
            p1, h);
    }
    return stencil([&](double x) { return sample_loss(spec, ProbPair{1.0 - x, x}, y, class_weight).value; },
                   p1, h);
}

std::vector<double> finite_diff_set_grad(const LossSpec& spec, std::span<const ProbPair> ps,
                                         std::span<const OneHotLabel> ys, double h) {
    std::vector<ProbPair> pv(ps.begin(), ps.end());
    const std::vector<OneHotLabel> yv(ys.begin(), ys.end());
    std::vector<double> out(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) {
        out[i] = set_coordinate_fd(spec, pv, yv, i, h);
    }
    return out;
}

double analytic_grad(const GradCheckInput& in) {
    if (in.spec.kind == LossKind::DL_set && !in.set_p1.empty()) {
        return dl_set_loss(pairs_of(in.set_p1), labels_of(in.set_y1), in.spec.gamma).dvalue_dp1[in.set_index];
    }
    return sample_loss(in.spec, ProbPair{1.0 - in.p1, in.p1}, OneHotLabel::from_class(in.y1), in.class_weight)
        .dvalue_dp1;
}

std::vector<GradCheckReport> gradcheck_all(std::size_t samples_per_loss, std::uint64_t seed,
                                           const AnalyticGradFn& analytic) {
    if (samples_per_loss < 1) {
        throw std::invalid_argument("gradcheck_all: samples_per_loss must be >= 1");
    }
    std::vector<GradCheckReport> reports;
    for (const LossKind kind : kAllLossKinds) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
        GradCheckReport report;
        report.loss_kind = kind;
        report.sample_count = samples_per_loss;
        std::tuple<bool, double, double> worst_key{false, -1.0, -1.0};
        for (std::size_t s = 0; s < samples_per_loss; ++s) {
            const GradCheckInput in = draw_input(kind, rng);
            const double a = analytic(in);
            const double n = numeric_grad(in);
            const double abs_err = std::abs(a - n);
            const double scale = std::max(std::abs(a), std::abs(n));
            const double rel_err = scale > 0.0 ? abs_err / scale : 0.0;
            const bool abs_ok = abs_err < kGradAbsTolerance;
            const bool ok = abs_ok || rel_err < kGradRelTolerance;
            report.passed = report.passed && ok && std::isfinite(a);
            report.max_abs_error = std::max(report.max_abs_error, abs_err);
            if (!abs_ok) {
                report.max_rel_error = std::max(report.max_rel_error, rel_err);
            }
            // Samples judged on the relative criterion rank above the rest.
            const std::tuple<bool, double, double> key{!abs_ok, abs_ok ? 0.0 : rel_err, abs_err};
            if (key > worst_key) {
                worst_key = key;
                report.worst_input = in;
            }
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

std::string gradcheck_to_json(const std::vector<GradCheckReport>& reports) {
    auto arr = nlohmann::json::array();
    bool all_passed = true;
    for (const auto& r : reports) {
        all_passed = all_passed && r.passed;
        const auto& w = r.worst_input;
        arr.push_back({
            {"loss_kind", std::string(to_string(r.loss_kind))},
            {"sample_count", r.sample_count},
            {"max_rel_error", r.max_rel_error},
            {"max_abs_error", r.max_abs_error},
            {"passed", r.passed},
            {"worst_input",
             {{"p1", w.p1},
              {"y1", w.y1},
              {"alpha", w.spec.alpha},
              {"beta", w.spec.beta},
              {"gamma", w.spec.gamma},
              {"k", w.spec.k},
              {"class_weight", w.class_weight},
              {"detach_weight", w.spec.detach_weight}}},
        });
    }
    nlohmann::json j = {
        {"tolerance", {{"relative", kGradRelTolerance}, {"absolute", kGradAbsTolerance}, {"step", kFiniteDiffStep}}},
        {"passed", all_passed},
        {"reports", std::move(arr)},
    };
    return j.dump(2);
}

ThresholdF1 brute_force_best_threshold_f1(std::span<const ProbPair> ps, std::span<const int> golds) {
    if (ps.empty() || ps.size() != golds.size()) {
        throw std::invalid_argument("brute_force_best_threshold_f1: need equal non-empty inputs");
    }
    std::set<double> candidates{0.5};
    for (const auto& p : ps) {
        candidates.insert(p.p1);
        candidates.insert(std::nextafter(p.p1, -1.0));
    }
    ThresholdF1 best{0.5, -1.0};
    std::vector<int> preds(ps.size());
    for (const double t : candidates) {
        for (std::size_t i = 0; i < ps.size(); ++i) {
            preds[i] = ps[i].p1 > t ? 1 : 0;
        }
        const double f1 = metrics_from_counts(confusion(preds, golds)).f1;
        const bool better = f1 > best.f1 || (f1 == best.f1 && std::abs(t - 0.5) < std::abs(best.threshold - 0.5));
        if (better) {
            best = {t, f1};
        }
    }
    return best;
}

}  // namespace imbalance
