#include <gtest/gtest.h>

#include <random>

#include "kbmaint/network.hpp"
#include "kbmaint/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/random_network.hpp"

namespace kbm {
namespace {

// Reference enumeration: nested odometer with the last position fastest,
// written independently of config_index / enumerate_configs.
std::vector<std::vector<std::size_t>> odometer(const std::vector<std::size_t>& radices) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(radices.size(), 0);
  while (true) {
    out.push_back(cur);
    std::size_t i = radices.size();
    while (i > 0) {
      --i;
      if (++cur[i] < radices[i]) break;
      cur[i] = 0;
      if (i == 0) return out;
    }
    if (radices.empty()) return out;
  }
}

TEST(ConfigIndex, ZeroConfigIsZero) {
  const std::vector<std::size_t> radices{2, 3};
  EXPECT_EQ(config_index({{0, 0}}, radices), 0u);
}

TEST(ConfigIndex, MatchesPositionInOdometer) {
  const std::vector<std::size_t> radices{2, 3};
  const auto all = odometer(radices);
  ASSERT_EQ(all.size(), 6u);
  auto pos = std::find(all.begin(), all.end(), std::vector<std::size_t>{1, 2}) - all.begin();
  EXPECT_EQ(pos, 5);
  EXPECT_EQ(config_index({{1, 2}}, radices), 5u);
}

TEST(ConfigIndex, SingleParentIsIdentity) {
  const std::vector<std::size_t> radices{4};
  EXPECT_EQ(config_index({{3}}, radices), 3u);
}

TEST(ConfigIndex, RejectsOutOfRange) {
  const std::vector<std::size_t> radices{2, 3};
  EXPECT_THROW(config_index({{2, 0}}, radices), std::out_of_range);
  EXPECT_THROW(config_index({{0, 3}}, radices), std::out_of_range);
  EXPECT_THROW(config_index({{0}}, radices), std::out_of_range);
}

TEST(EnumerateConfigs, RootYieldsOneEmptyConfig) {
  auto net = testing::chain();
  auto configs = enumerate_configs(net, "A");
  ASSERT_EQ(configs.size(), 1u);
  EXPECT_TRUE(configs[0].assignment.empty());
}

TEST(EnumerateConfigs, TwoBinaryParentsInLastFastestOrder) {
  const std::vector<std::size_t> radices{2, 2};
  auto configs = enumerate_configs(radices);
  const auto expected = odometer(radices);
  ASSERT_EQ(configs.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(configs[i].assignment, expected[i]);
  EXPECT_EQ(configs[1].assignment, (std::vector<std::size_t>{0, 1}));
}

TEST(EnumerateConfigs, CountMatchesOdometer) {
  const std::vector<std::size_t> radices{2, 3};
  EXPECT_EQ(enumerate_configs(radices).size(), odometer(radices).size());
  EXPECT_EQ(odometer(radices).size(), 6u);
}

TEST(EnumerateConfigs, UnknownNodeThrows) {
  auto net = testing::chain();
  EXPECT_THROW(enumerate_configs(net, "Z"), MaintenanceError);
}

TEST(EnumerateConfigs, IndexRoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> radices(testing::uniform(rng, 0, 4));
    for (auto& r : radices) r = testing::uniform(rng, 1, 4);
    const auto configs = enumerate_configs(radices);
    ASSERT_EQ(configs.size(), config_count(radices));
    for (std::size_t j = 0; j < configs.size(); ++j) {
      ASSERT_EQ(config_index(configs[j], radices), j);
      ASSERT_EQ(config_at(j, radices), configs[j]);
    }
  }
}

TEST(EnumerateConfigs, LengthEqualsRowCount) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto net = testing::random_network(rng);
    for (const auto& v : net.variables)
      EXPECT_EQ(enumerate_configs(net, v.id).size(), net.cpts.at(v.id).rows.size());
  }
}

TEST(Validate, NormalizedChainHasNoFindings) {
  EXPECT_TRUE(validate_network(testing::chain()).ok());
}

TEST(Validate, ReportsUnnormalizedRow) {
  auto net = testing::chain();
  net.cpts["B"].rows[0] = {0.5, 0.6};
  auto report = validate_network(net);
  ASSERT_EQ(report.findings.size(), 1u);
  EXPECT_EQ(report.findings[0].node, "B");
  EXPECT_EQ(report.findings[0].invariant, "row-sum");
  EXPECT_EQ(report.findings[0].message, "row 0 of node B sums to 1.1");
}

TEST(Validate, ReportsTwoNodeCycle) {
  auto net = testing::chain();
  net.parents["A"] = {"B"};
  net.cpts["A"].parent_order = {"B"};
  net.cpts["A"].rows = {{0.5, 0.5}, {0.5, 0.5}};
  auto report = validate_network(net);
  ASSERT_EQ(report.findings.size(), 1u);
  EXPECT_EQ(report.findings[0].message, "cycle A,B");
}

TEST(Validate, ReportsShapeAndReferenceProblems) {
  auto net = testing::chain();
  net.cpts["B"].rows.pop_back();
  net.parents["C"] = {"A"};
  net.variables.push_back({"D", "D", {}});
  auto report = validate_network(net);
  std::vector<std::string> kinds;
  for (const auto& f : report.findings) kinds.push_back(f.invariant);
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), "cpt-shape"), kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), "parent-resolves"), kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), "outcomes"), kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), "cpt-present"), kinds.end());
}

TEST(Validate, ToleranceOverride) {
  auto net = testing::chain();
  net.cpts["A"].rows[0] = {0.5, 0.5 + 1e-7};
  EXPECT_FALSE(validate_network(net).ok());
  EXPECT_TRUE(validate_network(net, 1e-6).ok());
}

// Mutations a hand-edited file could contain. Each leaves the document
// parseable but may break an invariant.
void mutate(Network& net, std::mt19937_64& rng) {
  auto& v = net.variables[testing::uniform(rng, 0, net.variables.size() - 1)];
  auto& cpt = net.cpts[v.id];
  switch (testing::uniform(rng, 0, 7)) {
    case 0:
      cpt.rows[0][0] += 0.01;
      break;
    case 1:
      cpt.rows.pop_back();
      break;
    case 2:
      cpt.rows[0].push_back(0.0);
      break;
    case 3:
      v.outcomes.push_back(v.outcomes.front());
      break;
    case 4:
      net.parents[v.id].push_back("missing");
      cpt.parent_order = net.parents[v.id];
      break;
    case 5: {
      // Arc from the last node back to the first: a cycle when a path exists.
      const auto& first = net.variables.front().id;
      const auto& last = net.variables.back().id;
      if (first != last) {
        net.parents[first].push_back(last);
        net.cpts[first].parent_order = net.parents[first];
        auto rows = net.cpts[first].rows;
        net.cpts[first].rows.clear();
        for (const auto& r : rows)
          for (std::size_t i = 0; i < net.at(last).outcomes.size(); ++i)
            net.cpts[first].rows.push_back(r);
      }
      break;
    }
    case 6:
      net.cpts.erase(v.id);
      break;
    default:
      break;  // leave valid
  }
}

TEST(Validate, AgreesWithOracleOnWellFormedness) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    auto net = testing::random_network(rng);
    mutate(net, rng);
    bool oracle_ok = true;
    try {
      joint_distribution(net);
    } catch (const OracleError& e) {
      ASSERT_EQ(e.kind(), OracleFailure::Malformed);
      oracle_ok = false;
    }
    EXPECT_EQ(validate_network(net).ok(), oracle_ok) << "trial " << trial;
  }
}

}  // namespace
}  // namespace kbm
