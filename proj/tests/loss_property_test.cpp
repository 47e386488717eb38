// Randomized invariants for the loss family. Each property draws from a fixed
// seed so a failure replays exactly.

#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "imbalance/loss.hpp"
#include "imbalance/random.hpp"

namespace imbalance {
namespace {

constexpr int kSamples = 10'000;
constexpr int kGrid = 1'000;

OneHotLabel random_label(Rng& rng) { return OneHotLabel::from_class(rng.uniform() < 0.5 ? 0 : 1); }

double draw(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

TEST(LossProperty, DiceFamilyValuesInUnitInterval) {
    Rng rng(11);
    for (int i = 0; i < kSamples; ++i) {
        const auto p = ProbPair::from_p1(rng.uniform());
        const auto y = random_label(rng);
        const double g = draw(rng, 0.01, 3.0);
        const double a = draw(rng, 0.0, 3.0);
        const double b = draw(rng, 0.0, 3.0);
        for (const double v : {dl_sample_loss(p, y, g).value, tversky_loss(p, y, a, b, g).value,
                               dsc_selfadj_loss(p, y, a, g, false).value,
                               1.0 - dice_coefficient_sample(p, y, g)}) {
            ASSERT_GE(v, 0.0) << "p1=" << p.p1 << " y1=" << y.y1;
            ASSERT_LE(v, 1.0) << "p1=" << p.p1 << " y1=" << y.y1;
        }
    }
}

TEST(LossProperty, LogFamilyValuesNonNegative) {
    Rng rng(12);
    for (int i = 0; i < kSamples; ++i) {
        const auto p = ProbPair::from_p1(rng.uniform());
        const auto y = random_label(rng);
        const double w = draw(rng, 0.0, 5.0);
        ASSERT_GE(ce_loss(p, y).value, 0.0);
        ASSERT_GE(wce_loss(p, y, w).value, 0.0);
        ASSERT_GE(focal_loss(p, y, draw(rng, 0.0, 5.0), w).value, 0.0);
    }
}

TEST(LossProperty, DiceSampleLossMonotoneInP1) {
    Rng rng(13);
    for (int i = 0; i < kSamples; ++i) {
        double lo = rng.uniform();
        double hi = rng.uniform();
        if (lo == hi) {
            continue;
        }
        if (lo > hi) {
            std::swap(lo, hi);
        }
        const auto plo = ProbPair::from_p1(lo);
        const auto phi = ProbPair::from_p1(hi);
        ASSERT_GT(dl_sample_loss(plo, OneHotLabel::positive(), 1.0).value,
                  dl_sample_loss(phi, OneHotLabel::positive(), 1.0).value)
            << lo << " < " << hi;
        ASSERT_LT(dl_sample_loss(plo, OneHotLabel::negative(), 1.0).value,
                  dl_sample_loss(phi, OneHotLabel::negative(), 1.0).value)
            << lo << " < " << hi;
    }
}

TEST(LossProperty, DegeneracyChain) {
    Rng rng(14);
    for (int i = 0; i < kGrid; ++i) {
        const auto p = ProbPair::from_p1(draw(rng, 1e-6, 1.0));
        const auto y = random_label(rng);
        const double g = draw(rng, 0.0, 3.0);
        const auto ce = ce_loss(p, y);

        const auto fl = focal_loss(p, y, 0.0, 1.0);
        ASSERT_NEAR(fl.value, ce.value, 1e-12);
        ASSERT_NEAR(fl.dvalue_dp1, ce.dvalue_dp1, 1e-12 * std::max(1.0, std::abs(ce.dvalue_dp1)));

        const auto wce = wce_loss(p, y, 1.0);
        ASSERT_NEAR(wce.value, ce.value, 1e-12);
        ASSERT_NEAR(wce.dvalue_dp1, ce.dvalue_dp1, 1e-12 * std::max(1.0, std::abs(ce.dvalue_dp1)));

        const double plain_dice = 1.0 - dice_coefficient_sample(p, y, g + 1e-3);
        ASSERT_NEAR(dsc_selfadj_loss(p, y, 0.0, g + 1e-3, false).value, plain_dice, 1e-12);

        const double tl = tversky_loss(p, OneHotLabel::positive(), 0.5, 0.5, 0.0).value;
        ASSERT_NEAR(tl, 1.0 - dice_coefficient_sample(p, OneHotLabel::positive(), 0.0), 1e-12);
    }
}

TEST(LossProperty, DetachChangesGradientButNotValue) {
    Rng rng(15);
    int gradients_differ = 0;
    for (int i = 0; i < kSamples; ++i) {
        const auto p = ProbPair::from_p1(draw(rng, 0.01, 0.99));
        const auto y = random_label(rng);
        const double a = draw(rng, 0.1, 3.0);
        const double g = draw(rng, 0.01, 3.0);
        const auto attached = dsc_selfadj_loss(p, y, a, g, false);
        const auto detached = dsc_selfadj_loss(p, y, a, g, true);
        ASSERT_NEAR(attached.value, detached.value, 1e-15);
        gradients_differ += attached.dvalue_dp1 != detached.dvalue_dp1;
    }
    EXPECT_GT(gradients_differ, kSamples / 2);
}

TEST(LossProperty, SingletonSetMatchesSampleForm) {
    Rng rng(16);
    for (int i = 0; i < kGrid; ++i) {
        const double p1 = rng.uniform();
        const auto y = random_label(rng);
        const double g = draw(rng, 0.01, 3.0);
        const std::vector<ProbPair> ps{ProbPair::from_p1(p1)};
        const std::vector<OneHotLabel> ys{y};
        const double expected = 1.0 - (2 * p1 * y.y1 + g) / (p1 * p1 + y.y1 * y.y1 + g);
        ASSERT_NEAR(dl_set_loss(ps, ys, g).value, expected, 1e-12);
        ASSERT_NEAR(dl_sample_loss(ps[0], y, g).value, expected, 1e-12);
    }
}

TEST(LossProperty, SelfAdjustingWeightPeaksAtHalf) {
    const auto f = [](double p) { return (1.0 - p) * p; };
    Rng rng(17);
    for (int i = 0; i < kSamples; ++i) {
        const double p = rng.uniform();
        if (p == 0.5) {
            continue;
        }
        ASSERT_GT(f(0.5), f(p)) << p;
    }
    EXPECT_LT(f(1e-9), 1e-8);
    EXPECT_LT(f(1.0 - 1e-9), 1e-8);
}

}  // namespace
}  // namespace imbalance
