#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arbgraph {

enum class VerificationStatus { kPassed, kFailed, kNoSafeOption };

/// Outcome of checking one command. NO_SAFE_OPTION is only ever produced by
/// an arbitrator whose options are exhausted, never by a verifier itself.
struct VerificationResult {
  VerificationStatus status = VerificationStatus::kFailed;
  std::string detail;

  bool passed() const { return status == VerificationStatus::kPassed; }

  static VerificationResult pass() { return {VerificationStatus::kPassed, {}}; }
  static VerificationResult fail(std::string why) {
    return {VerificationStatus::kFailed, std::move(why)};
  }
  static VerificationResult noSafeOption() {
    return {VerificationStatus::kNoSafeOption, "NO_SAFE_OPTION"};
  }

  bool operator==(const VerificationResult&) const = default;
};

/// A named, pure check applied to a candidate command before execution.
/// verify() never throws: exceptions from the callable map to FAILED, and
/// failure details are prefixed with the verifier name so that rejection
/// records identify which check tripped.
template <typename Situation, typename Command>
class Verifier {
 public:
  using CheckFn = std::function<VerificationResult(const Command&, const Situation&)>;

  /// Default: accepts everything.
  Verifier()
      : Verifier("always_pass",
                 [](const Command&, const Situation&) { return VerificationResult::pass(); }) {}

  Verifier(std::string name, CheckFn check)
      : name_(std::move(name)), check_(std::move(check)), prefix_details_(true) {
    if (!check_) throw std::invalid_argument("Verifier '" + name_ + "': null check function");
  }

  const std::string& name() const { return name_; }

  VerificationResult verify(const Command& command, const Situation& situation) const {
    VerificationResult result;
    try {
      result = check_(command, situation);
    } catch (const std::exception& e) {
      result = VerificationResult::fail(std::string("internal error: ") + e.what());
    } catch (...) {
      result = VerificationResult::fail("internal error");
    }
    if (result.status == VerificationStatus::kNoSafeOption) {
      result = VerificationResult::fail("invalid verifier status NO_SAFE_OPTION");
    }
    if (!result.passed() && prefix_details_) {
      result.detail = result.detail.empty() ? name_ : name_ + ": " + result.detail;
    }
    return result;
  }

  /// Builds a verifier whose callable already emits fully-qualified details
  /// (used by combinators that delegate to named members).
  static Verifier composite(std::string name, CheckFn check) {
    Verifier v(std::move(name), std::move(check));
    v.prefix_details_ = false;
    return v;
  }

 private:
  std::string name_;
  CheckFn check_;
  bool prefix_details_;
};

/// Conjunction of verifiers. Passes iff every member passes; evaluation
/// short-circuits and the first failure's detail is reported.
template <typename Situation, typename Command>
Verifier<Situation, Command> allOf(std::vector<Verifier<Situation, Command>> members) {
  if (members.empty()) throw std::invalid_argument("allOf: empty verifier list");
  return Verifier<Situation, Command>::composite(
      "all_of", [members = std::move(members)](const Command& command, const Situation& situation) {
        for (const auto& member : members) {
          auto result = member.verify(command, situation);
          if (!result.passed()) return result;
        }
        return VerificationResult::pass();
      });
}

}  // namespace arbgraph
