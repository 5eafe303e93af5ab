#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

#include "arbgraph/core.hpp"
#include "arbgraph/random.hpp"

namespace arbgraph {

/// Fallback behavior that repeats the last root-executed command, bridging
/// intermittent failures of preferred options. Not applicable until a
/// command has been executed, or once the stored command is older than the
/// staleness limit (in steps).
template <typename S, typename C>
class ContinueLastCommand : public Behavior<S, C> {
 public:
  ContinueLastCommand(std::string name, const StepLog<C>* log, long staleness_limit = 1)
      : Behavior<S, C>(std::move(name)), log_(log), staleness_limit_(staleness_limit) {
    if (!log_) throw std::invalid_argument("ContinueLastCommand: null step log");
    if (staleness_limit_ < 1) {
      throw std::invalid_argument("ContinueLastCommand: staleness limit must be >= 1");
    }
  }

  bool checkInvocation(const S&) const override {
    return log_->lastCommand().has_value() && log_->lastCommandAge() <= staleness_limit_;
  }

  std::optional<C> getCommand(const S&) override { return log_->lastCommand(); }

 private:
  const StepLog<C>* log_;
  long staleness_limit_;
};

/// Test/demo decorator that makes a wrapped behavior fail on demand,
/// either by signalling a computation failure or by emitting a deliberately
/// malformed command supplied by the caller. Transparent otherwise: it keeps
/// the wrapped behavior's name so snapshots and timelines are unaffected.
template <typename S, typename C>
class FaultInjection : public Behavior<S, C> {
 public:
  enum class Mode { kSignalFailure, kBadCommand };

  using BadCommandFn = std::function<C(const S&)>;

  FaultInjection(std::shared_ptr<Behavior<S, C>> inner, Mode mode, std::function<bool()> trigger,
                 BadCommandFn bad_command = {})
      : Behavior<S, C>(inner ? inner->name() : ""),
        inner_(std::move(inner)),
        mode_(mode),
        trigger_(std::move(trigger)),
        bad_command_(std::move(bad_command)) {
    if (!inner_) throw std::invalid_argument("FaultInjection: null inner behavior");
    if (!trigger_) throw std::invalid_argument("FaultInjection: null trigger");
    if (mode_ == Mode::kBadCommand && !bad_command_) {
      throw std::invalid_argument("FaultInjection: bad-command mode needs a command factory");
    }
  }

  bool checkInvocation(const S& situation) const override {
    return inner_->checkInvocation(situation);
  }
  bool checkCommitment(const S& situation) const override {
    return inner_->checkCommitment(situation);
  }
  void gainControl(const S& situation) override { inner_->gainControl(situation); }
  void loseControl(const S& situation) override { inner_->loseControl(situation); }
  void resetStepTrace() override { inner_->resetStepTrace(); }

  std::optional<C> getCommand(const S& situation) override {
    if (trigger_()) {
      ++faults_injected_;
      if (mode_ == Mode::kSignalFailure) return std::nullopt;
      return bad_command_(situation);
    }
    return inner_->getCommand(situation);
  }

  long faultsInjected() const { return faults_injected_; }

 private:
  std::shared_ptr<Behavior<S, C>> inner_;
  Mode mode_;
  std::function<bool()> trigger_;
  BadCommandFn bad_command_;
  long faults_injected_ = 0;
};

/// Trigger firing independently with fixed probability, reproducible from
/// the seed.
inline std::function<bool()> probabilityTrigger(double probability, std::uint64_t seed) {
  if (probability < 0.0 || probability > 1.0) {
    throw std::invalid_argument("probabilityTrigger: probability must be in [0, 1]");
  }
  auto rng = std::make_shared<Rng>(seed);
  return [rng, probability]() { return rng->nextDouble() < probability; };
}

/// Trigger firing on an explicit set of step indices, read from a counter
/// owned by the caller (typically the run loop's step variable).
inline std::function<bool()> stepTrigger(std::set<long> steps, const long* current_step) {
  if (!current_step) throw std::invalid_argument("stepTrigger: null step pointer");
  return [steps = std::move(steps), current_step]() { return steps.count(*current_step) > 0; };
}

}  // namespace arbgraph
