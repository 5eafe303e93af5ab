#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arbgraph/verification.hpp"

namespace arbgraph {

/// Contract for one behavior component. Situation and Command are opaque to
/// the framework; demos instantiate them with their own domain types.
///
/// The arbitrator guarantees that getCommand is only called on applicable
/// options and that gain/loseControl fire at most once per control
/// transition. checkInvocation/checkCommitment must be pure with respect to
/// the situation; a behavior that cannot evaluate its condition should
/// return false rather than throw.
template <typename S, typename C>
class Behavior {
 public:
  using Situation = S;
  using Command = C;

  explicit Behavior(std::string name) : name_(std::move(name)) {}
  virtual ~Behavior() = default;

  const std::string& name() const { return name_; }

  virtual bool checkInvocation(const S& situation) const = 0;

  /// Only meaningful while this behavior holds control. Default: never
  /// commits (stateless behaviors re-qualify through invocation each step).
  virtual bool checkCommitment(const S& /*situation*/) const { return false; }

  virtual void gainControl(const S& /*situation*/) {}
  virtual void loseControl(const S& /*situation*/) {}

  /// Computes a command for the current situation. Returning nullopt (or
  /// throwing) signals a computation failure, which the arbitrator treats
  /// exactly like a failed verification of this option.
  virtual std::optional<C> getCommand(const S& situation) = 0;

  /// Clears any per-step evaluation record (arbitrators override).
  virtual void resetStepTrace() {}

 private:
  std::string name_;
};

struct OptionFlags {
  /// A committed non-interruptable option is ranked first regardless of the
  /// strategy; interruptable options can be outranked while committed.
  bool interruptable = false;
  /// Last-resort options skip the verification step entirely.
  bool verification_exempt = false;
};

/// How one option fared during a step, for introspection.
enum class OptionVerification { kNotEvaluated, kPassed, kFailed, kExempt };

struct OptionTrace {
  bool applicable = false;
  bool committed = false;
  OptionVerification verification = OptionVerification::kNotEvaluated;
  std::string detail;
  bool chosen = false;
};

struct StepTrace {
  bool evaluated = false;
  VerificationStatus outcome = VerificationStatus::kNoSafeOption;
  std::vector<OptionTrace> options;

  void begin(std::size_t option_count) {
    evaluated = true;
    outcome = VerificationStatus::kNoSafeOption;
    options.assign(option_count, OptionTrace{});
  }
  void reset() {
    evaluated = false;
    outcome = VerificationStatus::kNoSafeOption;
    options.clear();
  }
};

/// Lightweight view of an applicable option handed to strategies.
template <typename S, typename C>
struct OptionRef {
  std::size_t index = 0;  // registration index within the arbitrator
  const Behavior<S, C>* behavior = nullptr;
  OptionFlags flags;
};

/// Per-step context for sorting. `active` is the option that held control
/// coming into this step; `committed` is set when that option's commitment
/// condition held. When the committed option is non-interruptable the
/// arbitrator pins it first and removes it from the strategy's input
/// (`committed_pinned` tells the strategy so cursor-style state stays put).
struct SortContext {
  std::size_t option_count = 0;
  std::optional<std::size_t> active;
  std::optional<std::size_t> committed;
  bool committed_pinned = false;
};

/// Sorting strategy for Algorithm "filter then sort" step. Implementations
/// must return a permutation of the input indices; they may keep per-step
/// state (cursor, rng) which advances only when sortOptions runs.
template <typename S, typename C>
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::vector<std::size_t> sortOptions(const std::vector<OptionRef<S, C>>& applicable,
                                               const SortContext& context, const S& situation) = 0;
};

/// The (command, verification) pair returned by an arbitrator. The command
/// is absent exactly when the result is NO_SAFE_OPTION.
template <typename C>
struct VerifiedCommand {
  std::optional<C> command;
  VerificationResult result;

  bool passed() const { return result.passed(); }
  bool noSafeOption() const { return result.status == VerificationStatus::kNoSafeOption; }
};

/// Composite node: filters applicable child options, orders them by its
/// strategy, and returns the first command that passes its verifier.
/// An arbitrator is itself a Behavior, so graphs nest.
template <typename S, typename C>
class Arbitrator : public Behavior<S, C> {
 public:
  struct Option {
    std::shared_ptr<Behavior<S, C>> child;
    OptionFlags flags;
  };

  Arbitrator(std::string name, std::unique_ptr<Strategy<S, C>> strategy,
             Verifier<S, C> verifier = Verifier<S, C>{})
      : Behavior<S, C>(std::move(name)),
        strategy_(std::move(strategy)),
        verifier_(std::move(verifier)) {
    if (!strategy_) throw std::invalid_argument("Arbitrator '" + this->name() + "': null strategy");
  }

  std::size_t addOption(std::shared_ptr<Behavior<S, C>> child, OptionFlags flags = {}) {
    if (!child) throw std::invalid_argument("Arbitrator '" + this->name() + "': null option");
    for (const auto& existing : options_) {
      if (existing.child->name() == child->name()) {
        throw std::invalid_argument("Arbitrator '" + this->name() + "': duplicate option name '" +
                                    child->name() + "'");
      }
    }
    options_.push_back(Option{std::move(child), flags});
    return options_.size() - 1;
  }

  const std::vector<Option>& options() const { return options_; }
  const std::optional<std::size_t>& activeOption() const { return active_option_; }
  const StepTrace& stepTrace() const { return trace_; }
  const Verifier<S, C>& verifier() const { return verifier_; }
  Strategy<S, C>& strategy() { return *strategy_; }

  /// Registration-ordered indices of options applicable in `situation`:
  /// the committed active option plus every option whose invocation holds.
  std::vector<std::size_t> applicableOptions(const S& situation) const {
    std::vector<std::size_t> applicable;
    for (std::size_t i = 0; i < options_.size(); ++i) {
      if (isCommitted(i, situation) || safeInvocation(i, situation)) applicable.push_back(i);
    }
    return applicable;
  }

  /// Algorithm core: returns the first sorted applicable option whose
  /// command passes verification, or NO_SAFE_OPTION when every candidate is
  /// rejected. Verification-exempt options skip the verifier. Control
  /// transfers (lose then gain) happen after the decision resolves.
  VerifiedCommand<C> bestOption(const S& situation) {
    trace_.begin(options_.size());

    std::vector<OptionRef<S, C>> applicable;
    SortContext context;
    context.option_count = options_.size();
    context.active = active_option_;
    for (std::size_t i = 0; i < options_.size(); ++i) {
      const bool committed = isCommitted(i, situation);
      const bool invocable = safeInvocation(i, situation);
      trace_.options[i].committed = committed;
      trace_.options[i].applicable = committed || invocable;
      if (committed) context.committed = i;
      if (committed || invocable) {
        applicable.push_back(OptionRef<S, C>{i, options_[i].child.get(), options_[i].flags});
      }
    }

    const auto order = sortApplicable(applicable, context, situation);

    for (std::size_t index : order) {
      auto& option = options_[index];
      auto& record = trace_.options[index];

      std::optional<C> command = safeGetCommand(index, situation);
      if (!command.has_value()) {
        record.verification = OptionVerification::kFailed;
        record.detail = "behavior error";
        continue;
      }

      if (option.flags.verification_exempt) {
        record.verification = OptionVerification::kExempt;
        return choose(index, situation, std::move(*command));
      }

      VerificationResult result = verifier_.verify(*command, situation);
      if (result.passed()) {
        record.verification = OptionVerification::kPassed;
        return choose(index, situation, std::move(*command));
      }
      record.verification = OptionVerification::kFailed;
      record.detail = result.detail;
    }

    transferControl(std::nullopt, situation);
    trace_.outcome = VerificationStatus::kNoSafeOption;
    return VerifiedCommand<C>{std::nullopt, VerificationResult::noSafeOption()};
  }

  // Behavior interface: an arbitrator is applicable when at least one child
  // option is, committed while its active child remains applicable.
  bool checkInvocation(const S& situation) const override {
    return !applicableOptions(situation).empty();
  }
  bool checkCommitment(const S& situation) const override {
    return active_option_.has_value() && isCommitted(*active_option_, situation);
  }
  void loseControl(const S& situation) override { transferControl(std::nullopt, situation); }

  /// As a nested option: delegates to bestOption. A NO_SAFE_OPTION result
  /// surfaces as a computation failure, which the parent treats as a failed
  /// verification of this option.
  std::optional<C> getCommand(const S& situation) override {
    auto verified = bestOption(situation);
    return std::move(verified.command);
  }

  void resetStepTrace() override {
    trace_.reset();
    for (auto& option : options_) option.child->resetStepTrace();
  }

 private:
  bool isCommitted(std::size_t index, const S& situation) const {
    if (!active_option_.has_value() || *active_option_ != index) return false;
    try {
      return options_[index].child->checkCommitment(situation);
    } catch (...) {
      return false;
    }
  }

  bool safeInvocation(std::size_t index, const S& situation) const {
    try {
      return options_[index].child->checkInvocation(situation);
    } catch (...) {
      return false;
    }
  }

  std::optional<C> safeGetCommand(std::size_t index, const S& situation) {
    try {
      return options_[index].child->getCommand(situation);
    } catch (...) {
      return std::nullopt;
    }
  }

  std::vector<std::size_t> sortApplicable(const std::vector<OptionRef<S, C>>& applicable,
                                          SortContext context, const S& situation) {
    if (applicable.empty()) return {};

    std::vector<std::size_t> order;
    std::vector<OptionRef<S, C>> input = applicable;
    if (context.committed.has_value() && !options_[*context.committed].flags.interruptable) {
      context.committed_pinned = true;
      order.push_back(*context.committed);
      std::erase_if(input, [&](const OptionRef<S, C>& ref) { return ref.index == *context.committed; });
      if (input.empty()) return order;
    }

    auto sorted = strategy_->sortOptions(input, context, situation);
    if (!isPermutation(sorted, input)) {
      throw std::logic_error("Arbitrator '" + this->name() +
                             "': strategy output is not a permutation of its input");
    }
    order.insert(order.end(), sorted.begin(), sorted.end());
    return order;
  }

  static bool isPermutation(const std::vector<std::size_t>& sorted,
                            const std::vector<OptionRef<S, C>>& input) {
    if (sorted.size() != input.size()) return false;
    std::vector<std::size_t> a = sorted;
    std::vector<std::size_t> b;
    b.reserve(input.size());
    for (const auto& ref : input) b.push_back(ref.index);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
  }

  VerifiedCommand<C> choose(std::size_t index, const S& situation, C command) {
    trace_.options[index].chosen = true;
    trace_.outcome = VerificationStatus::kPassed;
    transferControl(index, situation);
    return VerifiedCommand<C>{std::move(command), VerificationResult::pass()};
  }

  void transferControl(std::optional<std::size_t> next, const S& situation) {
    if (next == active_option_) return;
    if (active_option_.has_value()) {
      options_[*active_option_].child->loseControl(situation);
    }
    active_option_ = next;
    if (next.has_value()) {
      options_[*next].child->gainControl(situation);
    }
  }

  std::vector<Option> options_;
  std::unique_ptr<Strategy<S, C>> strategy_;
  Verifier<S, C> verifier_;
  std::optional<std::size_t> active_option_;
  StepTrace trace_;
};

/// Step counter plus the last root-executed command, shared with fallback
/// behaviors that repeat or continue it.
template <typename C>
class StepLog {
 public:
  void beginStep() { ++step_; }
  long currentStep() const { return step_; }

  void recordExecuted(const C& command) {
    last_command_ = command;
    last_step_ = step_;
  }

  const std::optional<C>& lastCommand() const { return last_command_; }

  /// Steps elapsed since the last executed command; a large value when none.
  long lastCommandAge() const {
    if (!last_command_.has_value()) return std::numeric_limits<long>::max();
    return step_ - last_step_;
  }

 private:
  long step_ = -1;
  std::optional<C> last_command_;
  long last_step_ = 0;
};

/// One top-level arbitration step: clears traces, asks the root for its best
/// verified command and records it in the log when execution is possible.
/// A NO_SAFE_OPTION result is surfaced to the caller, not thrown.
template <typename S, typename C>
VerifiedCommand<C> executeStep(Arbitrator<S, C>& root, const S& situation, StepLog<C>& log) {
  log.beginStep();
  root.resetStepTrace();
  auto verified = root.bestOption(situation);
  if (verified.passed()) log.recordExecuted(*verified.command);
  return verified;
}

template <typename S, typename C>
VerifiedCommand<C> executeStep(Arbitrator<S, C>& root, const S& situation) {
  root.resetStepTrace();
  return root.bestOption(situation);
}

}  // namespace arbgraph
