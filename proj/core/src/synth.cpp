#include "imbalance/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "imbalance/random.hpp"

namespace imbalance {

namespace {

constexpr std::array<std::string_view, 5> kTransformNames = {
    "original", "add_positive", "add_negative", "downsample_negative", "add_both",
};

std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

std::vector<double> sample_point(Rng& rng, std::size_t dim, double center) {
    std::vector<double> x(dim);
    for (auto& v : x) {
        v = center + kClusterSigma * rng.normal();
    }
    return x;
}

std::vector<std::size_t> indices_of_class(const LabeledBatch& batch, bool positive) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch.labels[i].is_positive() == positive) {
            out.push_back(i);
        }
    }
    return out;
}

void append_jittered(LabeledBatch& out, const LabeledBatch& src,
                     const std::vector<std::size_t>& pool, std::size_t count, Rng& rng,
                     double sigma) {
    if (count > 0 && pool.empty()) {
        throw InfeasibleTransformError("no template examples of the requested class");
    }
    for (std::size_t n = 0; n < count; ++n) {
        const std::size_t i = pool[rng.index(pool.size())];
        std::vector<double> x = src.features[i];
        for (auto& v : x) {
            v += sigma * rng.normal();
        }
        out.push_back(std::move(x), src.labels[i]);
    }
}

// Extra examples of one class needed so it makes up `fraction` of the total.
double extra_needed(double fraction, double own, double other) {
    return (fraction * (own + other) - own) / (1.0 - fraction);
}

}  // namespace

std::size_t DataSpec::n_negative() const { return round_count(ratio * static_cast<double>(n_positive)); }

std::size_t DataSpec::n_easy_negative() const {
    return round_count(easy_negative_fraction * static_cast<double>(n_negative()));
}

void DataSpec::validate() const {
    if (n_positive < 1) {
        throw std::invalid_argument("n_positive must be >= 1");
    }
    if (!std::isfinite(ratio) || ratio <= 0.0) {
        throw std::invalid_argument("ratio must be positive");
    }
    if (!(easy_negative_fraction >= 0.0 && easy_negative_fraction <= 1.0)) {
        throw std::invalid_argument("easy_negative_fraction must be in [0,1]");
    }
    if (feature_dim < 1) {
        throw std::invalid_argument("feature_dim must be >= 1");
    }
    if (!std::isfinite(jitter_sigma) || jitter_sigma < 0.0) {
        throw std::invalid_argument("jitter_sigma must be >= 0");
    }
}

double ratio_preset(std::string_view name) {
    for (const auto& p : kRatioPresets) {
        if (p.name == name) {
            return p.ratio;
        }
    }
    throw std::invalid_argument("unknown ratio preset '" + std::string(name) + "'");
}

double LabeledBatch::positive_fraction() const noexcept {
    return empty() ? 0.0 : static_cast<double>(counts.positive) / static_cast<double>(size());
}

std::vector<int> LabeledBatch::golds() const {
    std::vector<int> out(labels.size());
    std::transform(labels.begin(), labels.end(), out.begin(), [](const OneHotLabel& y) { return y.y1; });
    return out;
}

void LabeledBatch::push_back(std::vector<double> x, OneHotLabel y) {
    features.push_back(std::move(x));
    labels.push_back(y);
    ++(y.is_positive() ? counts.positive : counts.negative);
}

void LabeledBatch::recount() {
    counts = {};
    for (const auto& y : labels) {
        ++(y.is_positive() ? counts.positive : counts.negative);
    }
}

void LabeledBatch::validate() const {
    if (features.size() != labels.size()) {
        throw std::invalid_argument("features and labels differ in length");
    }
    const std::size_t dim = feature_dim();
    ClassCounts recounted;
    for (std::size_t i = 0; i < size(); ++i) {
        if (features[i].size() != dim) {
            throw std::invalid_argument("inconsistent feature dimension at row " + std::to_string(i));
        }
        labels[i].validate();
        ++(labels[i].is_positive() ? recounted.positive : recounted.negative);
    }
    if (recounted != counts) {
        throw std::invalid_argument("class counts do not match labels");
    }
}

LabeledBatch generate(const DataSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t n_neg = spec.n_negative();
    const std::size_t n_easy = spec.n_easy_negative();

    LabeledBatch batch;
    batch.features.reserve(spec.n_positive + n_neg);
    batch.labels.reserve(spec.n_positive + n_neg);
    for (std::size_t i = 0; i < spec.n_positive; ++i) {
        batch.push_back(sample_point(rng, spec.feature_dim, kPositiveCenter), OneHotLabel::positive());
    }
    for (std::size_t i = 0; i < n_neg; ++i) {
        const double center = i < n_easy ? kEasyNegativeCenter : kHardNegativeCenter;
        batch.push_back(sample_point(rng, spec.feature_dim, center), OneHotLabel::negative());
    }
    return batch;
}

std::string_view to_string(TransformKind kind) {
    return kTransformNames[static_cast<std::size_t>(kind)];
}

TransformKind transform_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kTransformNames.size(); ++i) {
        if (kTransformNames[i] == name) {
            return static_cast<TransformKind>(i);
        }
    }
    throw std::invalid_argument("unknown transform '" + std::string(name) + "'");
}

LabeledBatch transform(const LabeledBatch& batch, const TransformSpec& spec) {
    if (batch.empty()) {
        throw std::invalid_argument("transform: empty batch");
    }
    batch.validate();
    if (!std::isfinite(spec.jitter_sigma) || spec.jitter_sigma < 0.0) {
        throw std::invalid_argument("jitter_sigma must be >= 0");
    }
    const double t = spec.target_fraction_positive;
    const auto pos = static_cast<double>(batch.counts.positive);
    const auto neg = static_cast<double>(batch.counts.negative);
    Rng rng(spec.seed);

    switch (spec.kind) {
        case TransformKind::original:
            return batch;

        case TransformKind::add_positive: {
            if (!(t > 0.0 && t < 1.0)) {
                throw InfeasibleTransformError("add_positive target must be in (0,1)");
            }
            const double extra = extra_needed(t, pos, neg);
            if (extra < -0.5) {
                throw InfeasibleTransformError("add_positive cannot lower the positive fraction");
            }
            LabeledBatch out = batch;
            append_jittered(out, batch, indices_of_class(batch, true), round_count(std::max(extra, 0.0)),
                            rng, spec.jitter_sigma);
            return out;
        }

        case TransformKind::add_negative: {
            if (!(t > 0.0 && t < 1.0)) {
                throw InfeasibleTransformError("add_negative target must be in (0,1)");
            }
            const double extra = extra_needed(1.0 - t, neg, pos);
            if (extra < -0.5) {
                throw InfeasibleTransformError("add_negative cannot raise the positive fraction");
            }
            LabeledBatch out = batch;
            append_jittered(out, batch, indices_of_class(batch, false), round_count(std::max(extra, 0.0)),
                            rng, spec.jitter_sigma);
            return out;
        }

        case TransformKind::downsample_negative: {
            if (!(t > 0.0 && t <= 1.0)) {
                throw InfeasibleTransformError("downsample_negative target must be in (0,1]");
            }
            const std::size_t keep = round_count(pos * (1.0 - t) / t);
            if (keep > batch.counts.negative) {
                throw InfeasibleTransformError("downsample_negative target needs more negatives than exist");
            }
            auto negatives = indices_of_class(batch, false);
            // Partial Fisher-Yates: the first `drop` entries are removed.
            const std::size_t drop = negatives.size() - keep;
            for (std::size_t i = 0; i < drop; ++i) {
                const std::size_t j = i + rng.index(negatives.size() - i);
                std::swap(negatives[i], negatives[j]);
            }
            std::vector<bool> removed(batch.size(), false);
            for (std::size_t i = 0; i < drop; ++i) {
                removed[negatives[i]] = true;
            }
            LabeledBatch out;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                if (!removed[i]) {
                    out.push_back(batch.features[i], batch.labels[i]);
                }
            }
            return out;
        }

        case TransformKind::add_both: {
            const double g = spec.growth_factor;
            if (!std::isfinite(g) || g < 1.0) {
                throw InfeasibleTransformError("add_both growth_factor must be >= 1");
            }
            LabeledBatch out = batch;
            append_jittered(out, batch, indices_of_class(batch, true), round_count(pos * (g - 1.0)), rng,
                            spec.jitter_sigma);
            append_jittered(out, batch, indices_of_class(batch, false), round_count(neg * (g - 1.0)), rng,
                            spec.jitter_sigma);
            return out;
        }
    }
    throw std::invalid_argument("unhandled transform kind");
}

void write_csv(std::ostream& out, const LabeledBatch& batch) {
    const std::size_t dim = batch.feature_dim();
    for (std::size_t j = 0; j < dim; ++j) {
        out << 'f' << j << ',';
    }
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (double v : batch.features[i]) {
            std::snprintf(buf, sizeof buf, "%.9g", v);
            out << buf << ',';
        }
        out << batch.labels[i].y1 << '\n';
    }
}

LabeledBatch read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("csv: missing header");
    }
    const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns < 2 || line.substr(line.rfind(',') + 1) != "label") {
        throw std::invalid_argument("csv: header must end with 'label'");
    }
    LabeledBatch batch;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        std::vector<double> x;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                x.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::invalid_argument("csv: bad number on row " + std::to_string(row));
            }
        }
        if (x.size() != columns) {
            throw std::invalid_argument("csv: wrong column count on row " + std::to_string(row));
        }
        const double label = x.back();
        x.pop_back();
        if (label != 0.0 && label != 1.0) {
            throw std::invalid_argument("csv: label must be 0 or 1 on row " + std::to_string(row));
        }
        batch.push_back(std::move(x), OneHotLabel::from_class(static_cast<int>(label)));
    }
    return batch;
}

}  // namespace imbalance
