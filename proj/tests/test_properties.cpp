#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace dmfv;
using namespace dmfv::testing;

TEST(Properties, ChecksAgreeWithNaiveFormulas)
{
    auto o = naive_formula_agreement(2024, 10000);
    EXPECT_TRUE(o.ok) << o.why;
    EXPECT_EQ(o.samples, 10000);
}

TEST(Properties, NaiveFormulasSeeBothOutcomes)
{
    std::mt19937 rng(1);
    int open = 0, shut = 0;
    for (int n = 0; n < 2000; ++n) {
        auto [s, b] = random_state(rng);
        (naive_static(b, 2, 2) ? open : shut)++;
    }
    EXPECT_GT(open, 200);
    EXPECT_GT(shut, 200);
}

TEST(Properties, AcceptedTicksKeepDropletsApart)
{
    auto o = static_fc_invariant(7, 300);
    EXPECT_TRUE(o.ok) << o.why;
    EXPECT_GT(o.samples, 1000);
}

TEST(Properties, OccupancyIsConserved)
{
    auto o = occupancy_conservation(8, 300);
    EXPECT_TRUE(o.ok) << o.why;
    EXPECT_GT(o.samples, 10);
}

TEST(Properties, MixingKeepsConcentrationsSummingToOne)
{
    auto o = cf_sum_preservation(4, 2000);
    EXPECT_TRUE(o.ok) << o.why;
    auto v = verify_program(load_program("pcr.dmf"));
    for (const auto& m : v.trace.mixes) EXPECT_TRUE(m.cf.sums_to_one());
}

TEST(Properties, ConformanceIsReflexiveAndLabelBlind)
{
    auto o = conformance_reflexive_relabel(21, 5);
    EXPECT_TRUE(o.ok) << o.why;
    EXPECT_GE(o.samples, 150);
}

TEST(Properties, RelabelDetectsRealDifferences)
{
    auto a = load_graph("ratio_input.sg");
    auto b = load_graph("ratio_synth.sg");
    std::mt19937 rng(2);
    EXPECT_FALSE(conformance(a, relabel(b, rng), 5, std::nullopt, 0).passed());
}

TEST(Properties, InjectivePinMapsAddNothing)
{
    auto o = injective_pins_subsumed(33, 200);
    EXPECT_TRUE(o.ok) << o.why;
    EXPECT_EQ(o.samples, 403);
}
