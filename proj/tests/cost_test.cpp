#include <gtest/gtest.h>

#include <limits>

#include "kbmaint/cost.hpp"
#include "kbmaint/maintenance.hpp"
#include "support/fixtures.hpp"

namespace kbm {
namespace {

using testing::add_node;

CostResult cost(CostCase c, CostRole r, std::uint64_t m, std::uint64_t k, std::uint64_t p = 2,
                std::vector<std::uint64_t> radices = {}) {
  return assessment_cost({c, r, m, k, p, std::move(radices)});
}

// Free cells of a table over `q` outcomes with the given parent radices.
std::uint64_t free_cells(std::uint64_t q, const std::vector<std::uint64_t>& radices) {
  std::uint64_t rows = 1;
  for (auto r : radices) rows *= r;
  return rows * (q - 1);
}

TEST(AssessmentCost, IgnoredChangedNodeHalf) {
  auto r = cost(CostCase::IgnoredOutcome, CostRole::ChangedNode, 2, 1);
  ASSERT_TRUE(r.ratio);
  EXPECT_EQ(*r.ratio, 0.5);
}

TEST(AssessmentCost, IgnoredSuccessorThird) {
  auto r = cost(CostCase::IgnoredOutcome, CostRole::Successor, 2, 1);
  ASSERT_TRUE(r.ratio);
  EXPECT_NEAR(*r.ratio, 1.0 / 3.0, 1e-12);
}

TEST(AssessmentCost, IgnoredChangedNodeWithTwoParents) {
  auto r = cost(CostCase::IgnoredOutcome, CostRole::ChangedNode, 3, 2, 2, {3, 3});
  // General: the whole new table over 5 outcomes; special: the 2 new columns.
  EXPECT_EQ(r.general, free_cells(5, {3, 3}));
  EXPECT_EQ(r.special, 2u * 9u);
  EXPECT_EQ(r.general, 36u);
  EXPECT_EQ(r.special, 18u);
}

TEST(AssessmentCost, AssumedConstantSuccessorHalf) {
  auto r = cost(CostCase::AssumedConstant, CostRole::Successor, 1, 2);
  ASSERT_TRUE(r.ratio);
  EXPECT_EQ(*r.ratio, 0.5);
}

TEST(AssessmentCost, AssumedConstantChangedNodeIsFull) {
  auto r = cost(CostCase::AssumedConstant, CostRole::ChangedNode, 1, 3, 2, {2});
  EXPECT_EQ(r.general, r.special);
  EXPECT_EQ(r.general, 4u);
  ASSERT_TRUE(r.ratio);
  EXPECT_EQ(*r.ratio, 1.0);
}

TEST(AssessmentCost, SplitSinglePartIsFree) {
  for (std::uint64_t m = 2; m <= 6; ++m) {
    auto r = cost(CostCase::SplitOutcome, CostRole::ChangedNode, m, 1);
    EXPECT_EQ(r.special, 0u);
    ASSERT_TRUE(r.ratio);
    EXPECT_EQ(*r.ratio, 0.0);
  }
  auto degenerate = cost(CostCase::SplitOutcome, CostRole::ChangedNode, 1, 1);
  EXPECT_EQ(degenerate.general, 0u);
  EXPECT_FALSE(degenerate.ratio);
}

TEST(AssessmentCost, HeterogeneousRadicesUseProduct) {
  auto r = cost(CostCase::IgnoredOutcome, CostRole::ChangedNode, 2, 1, 2, {2, 3});
  EXPECT_EQ(r.general, 2u * 6u);
  EXPECT_EQ(r.special, 6u);
}

TEST(AssessmentCost, RejectsInvalidQueries) {
  EXPECT_THROW(cost(CostCase::IgnoredOutcome, CostRole::ChangedNode, 0, 1), std::invalid_argument);
  EXPECT_THROW(cost(CostCase::IgnoredOutcome, CostRole::ChangedNode, 2, 0), std::invalid_argument);
  EXPECT_THROW(cost(CostCase::IgnoredOutcome, CostRole::Successor, 2, 1, 1), std::invalid_argument);
  EXPECT_THROW(cost(CostCase::SplitOutcome, CostRole::ChangedNode, 2, 1, 2, {0}),
               std::invalid_argument);
}

TEST(AssessmentCost, OverflowIsAnError) {
  const auto big = std::numeric_limits<std::uint64_t>::max() / 2;
  EXPECT_THROW(cost(CostCase::IgnoredOutcome, CostRole::ChangedNode, 2, 1, 2, {big, 3}),
               std::overflow_error);
  EXPECT_THROW(cost(CostCase::IgnoredOutcome, CostRole::Successor, big, big, 3),
               std::overflow_error);
}

TEST(AssessmentCost, SpecialNeverExceedsGeneral) {
  for (auto c : {CostCase::IgnoredOutcome, CostCase::SplitOutcome, CostCase::AssumedConstant})
    for (auto role : {CostRole::ChangedNode, CostRole::Successor})
      for (std::uint64_t m = 1; m <= 6; ++m)
        for (std::uint64_t k = 1; k <= 10; ++k)
          for (std::uint64_t p = 2; p <= 4; ++p) {
            auto r = cost(c, role, m, k, p, {2, 3});
            EXPECT_LE(r.special, r.general);
            if (r.ratio) {
              EXPECT_GE(*r.ratio, 0.0);
              EXPECT_LE(*r.ratio, 1.0);
            }
            if (c != CostCase::AssumedConstant && m >= 2) EXPECT_LT(*r.ratio, 1.0);
          }
}

TEST(RatioCurves, IgnoredChangedNodeAtTwoOutcomes) {
  const std::vector<std::uint64_t> m{2}, k{1, 2, 3};
  auto pts = ratio_curves(CostCase::IgnoredOutcome, CostRole::ChangedNode, m, k);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(*pts[0].ratio, 0.5);
  EXPECT_NEAR(*pts[1].ratio, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(*pts[2].ratio, 3.0 / 4.0, 1e-15);
}

TEST(RatioCurves, AssumedConstantIndependentOfM) {
  const std::vector<std::uint64_t> m{1, 2, 3, 4, 5, 6}, k{1, 2, 3, 4};
  auto pts = ratio_curves(CostCase::AssumedConstant, CostRole::Successor, m, k);
  for (const auto& pt : pts) EXPECT_EQ(*pt.ratio, *pts[pt.k - 1].ratio);
}

TEST(RatioCurves, OrderIsMOuterKInner) {
  const std::vector<std::uint64_t> m{1, 2}, k{3, 4, 5};
  auto pts = ratio_curves(CostCase::SplitOutcome, CostRole::Successor, m, k);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0].m, 1u);
  EXPECT_EQ(pts[0].k, 3u);
  EXPECT_EQ(pts[2].k, 5u);
  EXPECT_EQ(pts[3].m, 2u);
  EXPECT_EQ(pts[3].k, 3u);
}

TEST(RatioCurves, MatchesAssessmentCostAcrossRadices) {
  std::vector<std::uint64_t> ms, ks;
  for (std::uint64_t i = 1; i <= 6; ++i) ms.push_back(i);
  for (std::uint64_t i = 1; i <= 10; ++i) ks.push_back(i);
  for (auto c : {CostCase::IgnoredOutcome, CostCase::SplitOutcome, CostCase::AssumedConstant})
    for (auto role : {CostRole::ChangedNode, CostRole::Successor})
      for (const auto& pt : ratio_curves(c, role, ms, ks))
        for (const auto& radices : std::vector<std::vector<std::uint64_t>>{{2}, {3, 3}, {2, 3, 4}})
          for (std::uint64_t p : {2, 3}) {
            auto r = cost(c, role, pt.m, pt.k, p, radices);
            ASSERT_EQ(pt.ratio.has_value(), r.ratio.has_value());
            if (pt.ratio) EXPECT_EQ(*pt.ratio, *r.ratio) << to_string(c) << " m=" << pt.m;
          }
}

TEST(RatioCurves, MonotoneInMAndK) {
  std::vector<std::uint64_t> ms, ks;
  for (std::uint64_t i = 1; i <= 6; ++i) ms.push_back(i);
  for (std::uint64_t i = 1; i <= 10; ++i) ks.push_back(i);
  for (auto c : {CostCase::IgnoredOutcome, CostCase::SplitOutcome})
    for (auto role : {CostRole::ChangedNode, CostRole::Successor}) {
      auto pts = ratio_curves(c, role, ms, ks);
      auto at = [&](std::size_t mi, std::size_t ki) { return pts[mi * ks.size() + ki].ratio; };
      for (std::size_t mi = 0; mi < ms.size(); ++mi)
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
          if (!at(mi, ki)) continue;
          if (mi + 1 < ms.size() && at(mi + 1, ki)) EXPECT_LE(*at(mi + 1, ki), *at(mi, ki));
          if (ki + 1 < ks.size() && at(mi, ki + 1)) EXPECT_GE(*at(mi, ki + 1), *at(mi, ki));
        }
    }
}

TEST(RatioCurves, RejectsEmptyOrZeroInputs) {
  const std::vector<std::uint64_t> none, zero{0}, one{1};
  EXPECT_THROW(ratio_curves(CostCase::IgnoredOutcome, CostRole::ChangedNode, none, one),
               std::invalid_argument);
  EXPECT_THROW(ratio_curves(CostCase::IgnoredOutcome, CostRole::ChangedNode, zero, one),
               std::invalid_argument);
}

TEST(Audit, IgnoredOnTwoParentNodeMatchesFormula) {
  Network net;
  net.version_label = "E";
  add_node(net, "P", {"p1", "p2", "p3"}, {}, {{0.2, 0.3, 0.5}});
  add_node(net, "Q", {"q1", "q2", "q3"}, {}, {{0.2, 0.3, 0.5}});
  std::vector<std::vector<double>> rows(9, {0.2, 0.3, 0.5});
  add_node(net, "A", {"a1", "a2", "a3"}, {"P", "Q"}, rows);
  Elicitation e;
  for (const char* p : {"p1", "p2", "p3"})
    for (const char* q : {"q1", "q2", "q3"}) e.push_back({{{"P", p}, {"Q", q}}, {0.1, 0.1}});
  auto t = add_outcomes_ignored(net, "A", {"a4", "a5"}, e);
  const auto* a = t.report.find("A");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->elicited, 18u);
  EXPECT_EQ(a->general_baseline, 36u);
  EXPECT_EQ(a->elicited, cost(CostCase::IgnoredOutcome, CostRole::ChangedNode, 3, 2, 2, {3, 3}).special);
}

TEST(Audit, AssumedConstantArcWithThreeOutcomeSuccessor) {
  Network net;
  net.version_label = "E";
  add_node(net, "A", {"a0", "a1"}, {}, {{0.5, 0.5}});
  add_node(net, "D", {"d0", "d1"}, {}, {{0.5, 0.5}});
  add_node(net, "B", {"b0", "b1", "b2"}, {"D"}, {{0.2, 0.3, 0.5}, {0.6, 0.3, 0.1}});
  auto t = add_arc_assumed_constant(net, "A", "B", "a0",
                                    {{{{"A", "a1"}, {"D", "d0"}}, {0.1, 0.1, 0.8}},
                                     {{{"A", "a1"}, {"D", "d1"}}, {0.3, 0.3, 0.4}}});
  const auto* b = t.report.find("B");
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->elicited, 4u);
  EXPECT_EQ(b->reused, 4u);
  auto r = cost(CostCase::AssumedConstant, CostRole::Successor, 1, 2, 3, {2});
  EXPECT_EQ(b->elicited, r.special);
  EXPECT_EQ(b->general_baseline, r.general);
}

TEST(Audit, HeterogeneousRadicesMatchProduct) {
  Network net;
  net.version_label = "E";
  add_node(net, "P", {"p1", "p2"}, {}, {{0.5, 0.5}});
  add_node(net, "Q", {"q1", "q2", "q3"}, {}, {{0.2, 0.3, 0.5}});
  add_node(net, "A", {"a1", "a2"}, {"P", "Q"}, std::vector<std::vector<double>>(6, {0.5, 0.5}));
  Elicitation e;
  for (const char* p : {"p1", "p2"})
    for (const char* q : {"q1", "q2", "q3"}) e.push_back({{{"P", p}, {"Q", q}}, {0.25}});
  auto t = add_outcomes_ignored(net, "A", {"a3"}, e);
  EXPECT_EQ(t.report.find("A")->elicited,
            cost(CostCase::IgnoredOutcome, CostRole::ChangedNode, 2, 1, 2, {2, 3}).special);
  EXPECT_EQ(t.report.find("A")->elicited, 6u);
}

TEST(Audit, ReplaceCptReusesNothing) {
  auto net = testing::chain();
  auto t = replace_cpt(net, "B", {{{{"A", "a1"}}, {0.5, 0.5}}, {{{"A", "a2"}}, {0.5, 0.5}}});
  EXPECT_EQ(t.report.find("B")->reused, 0u);
  EXPECT_EQ(t.report.find("B")->elicited, t.report.find("B")->general_baseline);
}

TEST(Audit, LaterEncodingOfSameNodeWins) {
  Transaction t;
  t.provenance.push_back({"B", {{1, 0}, {1, 0}}, 1, false});
  t.provenance.push_back({"B", {{0, 1}, {1, 0}}, 1, false});
  auto report = audit_transaction(t);
  ASSERT_EQ(report.nodes.size(), 1u);
  EXPECT_EQ(report.nodes[0].elicited, 1u);
  EXPECT_EQ(report.nodes[0].reused, 1u);
  EXPECT_EQ(report.nodes[0].general_baseline, 2u);
}

}  // namespace
}  // namespace kbm
