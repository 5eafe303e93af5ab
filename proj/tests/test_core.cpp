#include <gtest/gtest.h>

#include <memory>

#include "arbgraph/core.hpp"
#include "arbgraph/strategies.hpp"
#include "support/scripted.hpp"

using arbgraph::Arbitrator;
using arbgraph::OptionFlags;
using arbgraph::OptionVerification;
using arbgraph::VerificationStatus;
using testsupport::acceptSet;
using testsupport::allInvocable;
using testsupport::ScriptedBehavior;
using testsupport::ScriptSituation;

namespace {

using Graph = Arbitrator<ScriptSituation, int>;

struct GraphFixture {
  std::unique_ptr<Graph> root;
  std::vector<std::shared_ptr<ScriptedBehavior>> behaviors;
};

GraphFixture makePriorityGraph(std::size_t n, arbgraph::Verifier<ScriptSituation, int> verifier =
                                                  arbgraph::Verifier<ScriptSituation, int>{}) {
  GraphFixture g;
  g.root = std::make_unique<Graph>(
      "Root", std::make_unique<arbgraph::PriorityStrategy<ScriptSituation, int>>(),
      std::move(verifier));
  for (std::size_t i = 0; i < n; ++i) {
    auto b = std::make_shared<ScriptedBehavior>("B" + std::to_string(i), i);
    g.root->addOption(b);
    g.behaviors.push_back(b);
  }
  return g;
}

TEST(ApplicableOptions, EmptyWhenNothingInvocable) {
  auto g = makePriorityGraph(3);
  ScriptSituation s;
  s.invocable = {false, false, false};
  s.committable = {false, false, false};
  EXPECT_TRUE(g.root->applicableOptions(s).empty());
}

TEST(ApplicableOptions, RegistrationOrderFilter) {
  auto g = makePriorityGraph(3);
  ScriptSituation s;
  s.invocable = {true, false, true};
  s.committable = {false, false, false};
  EXPECT_EQ(g.root->applicableOptions(s), (std::vector<std::size_t>{0, 2}));
}

// Truth table for the applicability rule: an option is applicable iff it is
// the committed active option or its invocation condition holds.
TEST(ApplicableOptions, ActiveCommittedWithoutInvocationIsIncluded) {
  auto g = makePriorityGraph(2);
  // Make option 1 active first.
  ScriptSituation s0;
  s0.invocable = {false, true};
  s0.committable = {false, false};
  auto r0 = g.root->bestOption(s0);
  ASSERT_TRUE(r0.passed());
  EXPECT_EQ(*r0.command, 101);

  // Now invocation drops but commitment holds: still applicable.
  ScriptSituation s1;
  s1.invocable = {false, false};
  s1.committable = {false, true};
  EXPECT_EQ(g.root->applicableOptions(s1), (std::vector<std::size_t>{1}));

  // Commitment of a non-active option is ignored.
  ScriptSituation s2;
  s2.invocable = {false, false};
  s2.committable = {true, false};
  EXPECT_TRUE(g.root->applicableOptions(s2).empty());
}

TEST(ApplicableOptions, TruthTableEnumeration) {
  // Enumerate (active?, invocation, commitment) for a single option and
  // compare against the rule: applicable == (active && commitment) || invocation.
  for (bool active : {false, true}) {
    for (bool invocation : {false, true}) {
      for (bool commitment : {false, true}) {
        auto g = makePriorityGraph(1);
        if (active) {
          ScriptSituation boot = allInvocable(1);
          ASSERT_TRUE(g.root->bestOption(boot).passed());
        }
        ScriptSituation s;
        s.invocable = {invocation};
        s.committable = {commitment};
        const bool expected = (active && commitment) || invocation;
        EXPECT_EQ(g.root->applicableOptions(s).size(), expected ? 1u : 0u)
            << "active=" << active << " inv=" << invocation << " com=" << commitment;
      }
    }
  }
}

TEST(BestOption, SingleApplicableOptionPasses) {
  auto g = makePriorityGraph(1);
  auto r = g.root->bestOption(allInvocable(1));
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 100);
  EXPECT_EQ(g.root->stepTrace().options[0].verification, OptionVerification::kPassed);
}

TEST(BestOption, SkipsRejectedAndNeverQueriesLaterOptions) {
  auto g = makePriorityGraph(3, acceptSet({1, 2}));
  auto r = g.root->bestOption(allInvocable(3));
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 101);
  EXPECT_EQ(g.behaviors[0]->commandCalls(), 1);
  EXPECT_EQ(g.behaviors[1]->commandCalls(), 1);
  EXPECT_EQ(g.behaviors[2]->commandCalls(), 0);  // laziness
  EXPECT_EQ(g.root->stepTrace().options[2].verification, OptionVerification::kNotEvaluated);
}

TEST(BestOption, ExhaustionYieldsNoSafeOption) {
  auto g = makePriorityGraph(3, acceptSet({}));
  auto r = g.root->bestOption(allInvocable(3));
  EXPECT_TRUE(r.noSafeOption());
  EXPECT_FALSE(r.command.has_value());
}

TEST(BestOption, EmptyArbitratorYieldsNoSafeOption) {
  auto g = makePriorityGraph(0);
  ScriptSituation s;
  auto r = g.root->bestOption(s);
  EXPECT_TRUE(r.noSafeOption());
}

TEST(BestOption, BehaviorFailureIsTreatedAsFailedVerification) {
  auto g = makePriorityGraph(2);
  g.behaviors[0]->failCommands(true);
  auto r = g.root->bestOption(allInvocable(2));
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 101);
  EXPECT_EQ(g.root->stepTrace().options[0].verification, OptionVerification::kFailed);
  EXPECT_EQ(g.root->stepTrace().options[0].detail, "behavior error");
}

TEST(BestOption, BehaviorExceptionIsContained) {
  auto g = makePriorityGraph(2);
  g.behaviors[0]->throwCommands(true);
  auto r = g.root->bestOption(allInvocable(2));
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 101);
}

TEST(BestOption, ExemptOptionSkipsVerifier) {
  GraphFixture g;
  g.root = std::make_unique<Graph>(
      "Root", std::make_unique<arbgraph::PriorityStrategy<ScriptSituation, int>>(),
      acceptSet({}));  // rejects everything
  auto primary = std::make_shared<ScriptedBehavior>("primary", 0);
  auto last_resort = std::make_shared<ScriptedBehavior>("last_resort", 1);
  g.root->addOption(primary);
  g.root->addOption(last_resort, OptionFlags{.interruptable = false, .verification_exempt = true});
  auto r = g.root->bestOption(allInvocable(2));
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 101);
  EXPECT_EQ(g.root->stepTrace().options[1].verification, OptionVerification::kExempt);
}

TEST(BestOption, ControlTransfersOncePerTransitionLoseBeforeGain) {
  auto g = makePriorityGraph(2, acceptSet({0, 1}));
  std::vector<std::string> log;
  g.behaviors[0]->logControlTo(&log);
  g.behaviors[1]->logControlTo(&log);

  ScriptSituation s0 = allInvocable(2);
  ASSERT_TRUE(g.root->bestOption(s0).passed());  // option 0 chosen
  EXPECT_EQ(log, (std::vector<std::string>{"gain:B0"}));

  // Same choice again: no transfer.
  ASSERT_TRUE(g.root->bestOption(s0).passed());
  EXPECT_EQ(log, (std::vector<std::string>{"gain:B0"}));

  // Option 0 drops out: lose fires before gain.
  ScriptSituation s1;
  s1.invocable = {false, true};
  s1.committable = {false, false};
  ASSERT_TRUE(g.root->bestOption(s1).passed());
  EXPECT_EQ(log, (std::vector<std::string>{"gain:B0", "lose:B0", "gain:B1"}));

  // Exhaustion clears control.
  ScriptSituation s2;
  s2.invocable = {false, false};
  s2.committable = {false, false};
  EXPECT_TRUE(g.root->bestOption(s2).noSafeOption());
  EXPECT_EQ(log, (std::vector<std::string>{"gain:B0", "lose:B0", "gain:B1", "lose:B1"}));
  EXPECT_FALSE(g.root->activeOption().has_value());
}

TEST(BestOption, NestedArbitratorNoSafeOptionFallsToNextParentOption) {
  auto parent = std::make_unique<Graph>(
      "Parent", std::make_unique<arbgraph::PriorityStrategy<ScriptSituation, int>>());
  auto nested = std::make_shared<Graph>(
      "Nested", std::make_unique<arbgraph::PriorityStrategy<ScriptSituation, int>>(),
      acceptSet({}));  // nested rejects everything it produces
  auto inner = std::make_shared<ScriptedBehavior>("inner", 0);
  nested->addOption(inner);
  auto fallback = std::make_shared<ScriptedBehavior>("fallback", 1);
  parent->addOption(nested);
  parent->addOption(fallback);

  auto r = parent->bestOption(allInvocable(2));
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 101);
  EXPECT_EQ(parent->stepTrace().options[0].verification, OptionVerification::kFailed);
  EXPECT_EQ(parent->stepTrace().options[0].detail, "behavior error");
}

TEST(BestOption, NestedArbitratorCommandBubblesUp) {
  auto parent = std::make_unique<Graph>(
      "Parent", std::make_unique<arbgraph::PriorityStrategy<ScriptSituation, int>>());
  auto nested = std::make_shared<Graph>(
      "Nested", std::make_unique<arbgraph::PriorityStrategy<ScriptSituation, int>>());
  nested->addOption(std::make_shared<ScriptedBehavior>("inner", 1));
  parent->addOption(nested);

  ScriptSituation s = allInvocable(2);
  auto r = parent->bestOption(s);
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 101);
  EXPECT_TRUE(parent->stepTrace().options[0].chosen);
}

TEST(BestOption, CommittedNonInterruptableRanksFirst) {
  // Option 1 becomes active, then commits; despite option 0 being invocable
  // and registration-first, option 1 is tried first while committed.
  auto g = makePriorityGraph(2);
  ScriptSituation s0;
  s0.invocable = {false, true};
  s0.committable = {false, false};
  ASSERT_TRUE(g.root->bestOption(s0).passed());

  ScriptSituation s1;
  s1.invocable = {true, true};
  s1.committable = {false, true};
  auto r = g.root->bestOption(s1);
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 101);
  EXPECT_EQ(g.behaviors[0]->commandCalls(), 0);
}

TEST(BestOption, CommittedInterruptableYieldsToStrategyOrder) {
  GraphFixture g;
  g.root = std::make_unique<Graph>(
      "Root", std::make_unique<arbgraph::PriorityStrategy<ScriptSituation, int>>());
  auto b0 = std::make_shared<ScriptedBehavior>("B0", 0);
  auto b1 = std::make_shared<ScriptedBehavior>("B1", 1);
  g.root->addOption(b0);
  g.root->addOption(b1, OptionFlags{.interruptable = true, .verification_exempt = false});
  g.behaviors = {b0, b1};

  ScriptSituation s0;
  s0.invocable = {false, true};
  s0.committable = {false, false};
  ASSERT_TRUE(g.root->bestOption(s0).passed());

  ScriptSituation s1;
  s1.invocable = {true, true};
  s1.committable = {false, true};
  auto r = g.root->bestOption(s1);
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(*r.command, 100);  // priority order wins over the committed option
}

// Purity: evaluating the conditions repeatedly must not change the outcome
// of the subsequent step.
TEST(BestOption, ConditionCallsAreSideEffectFree) {
  auto plain = makePriorityGraph(3, acceptSet({1, 2}));
  auto probed = makePriorityGraph(3, acceptSet({1, 2}));
  ScriptSituation s = allInvocable(3);

  (void)probed.root->applicableOptions(s);
  (void)probed.root->applicableOptions(s);  // double evaluation

  auto a = plain.root->bestOption(s);
  auto b = probed.root->bestOption(s);
  ASSERT_TRUE(a.passed());
  ASSERT_TRUE(b.passed());
  EXPECT_EQ(*a.command, *b.command);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(plain.root->stepTrace().options[i].verification,
              probed.root->stepTrace().options[i].verification);
  }
}

TEST(BestOption, LazinessInvariantCommandCalls) {
  // get_command invocations == 1 + number of rejected options tried first.
  auto g = makePriorityGraph(4, acceptSet({2}));
  auto r = g.root->bestOption(allInvocable(4));
  ASSERT_TRUE(r.passed());
  int total = 0;
  for (const auto& b : g.behaviors) total += b->commandCalls();
  EXPECT_EQ(total, 3);  // options 0, 1 rejected, 2 accepted, 3 untouched
}

TEST(ExecuteStep, RecordsExecutedCommandInLog) {
  auto g = makePriorityGraph(1);
  arbgraph::StepLog<int> log;
  auto r = arbgraph::executeStep(*g.root, allInvocable(1), log);
  ASSERT_TRUE(r.passed());
  EXPECT_EQ(log.currentStep(), 0);
  ASSERT_TRUE(log.lastCommand().has_value());
  EXPECT_EQ(*log.lastCommand(), 100);
  EXPECT_EQ(log.lastCommandAge(), 0);
}

TEST(ExecuteStep, NoSafeOptionLeavesLogUntouched) {
  auto g = makePriorityGraph(1, acceptSet({}));
  arbgraph::StepLog<int> log;
  auto r = arbgraph::executeStep(*g.root, allInvocable(1), log);
  EXPECT_TRUE(r.noSafeOption());
  EXPECT_FALSE(log.lastCommand().has_value());
}

TEST(Arbitrator, DuplicateOptionNamesRejected) {
  auto g = makePriorityGraph(1);
  EXPECT_THROW(g.root->addOption(std::make_shared<ScriptedBehavior>("B0", 7)),
               std::invalid_argument);
}

TEST(Arbitrator, AsBehaviorInvocationMirrorsApplicability) {
  auto g = makePriorityGraph(2);
  ScriptSituation none;
  none.invocable = {false, false};
  none.committable = {false, false};
  EXPECT_FALSE(g.root->checkInvocation(none));
  EXPECT_TRUE(g.root->checkInvocation(allInvocable(2)));
}

// Brute-force reference for Algorithm BestOption: materialize commands of
// all applicable options in sorted order, verify each, pick the first pass.
TEST(BestOption, MatchesBruteForceReferenceOnSmallGraphs) {
  for (unsigned applicable_bits = 0; applicable_bits < 16; ++applicable_bits) {
    for (unsigned accept_bits = 0; accept_bits < 16; ++accept_bits) {
      std::set<int> accepted;
      for (int i = 0; i < 4; ++i) {
        if (accept_bits & (1u << i)) accepted.insert(i);
      }
      auto g = makePriorityGraph(4, acceptSet(accepted));
      ScriptSituation s;
      for (int i = 0; i < 4; ++i) s.invocable.push_back((applicable_bits & (1u << i)) != 0);
      s.committable.assign(4, false);

      // Reference: first applicable option in registration order whose id is
      // accepted.
      std::optional<int> expected;
      for (int i = 0; i < 4; ++i) {
        if (s.invocable[i] && accepted.count(i)) {
          expected = i + 100;
          break;
        }
      }

      auto r = g.root->bestOption(s);
      if (expected.has_value()) {
        ASSERT_TRUE(r.passed()) << "applicable=" << applicable_bits << " accept=" << accept_bits;
        EXPECT_EQ(*r.command, *expected);
      } else {
        EXPECT_TRUE(r.noSafeOption()) << "applicable=" << applicable_bits
                                      << " accept=" << accept_bits;
      }
    }
  }
}

}  // namespace
