#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arbgraph/core.hpp"
#include "arbgraph/random.hpp"

namespace arbgraph {

/// Priority arbitration: preference equals registration order.
template <typename S, typename C>
class PriorityStrategy : public Strategy<S, C> {
 public:
  std::vector<std::size_t> sortOptions(const std::vector<OptionRef<S, C>>& applicable,
                                       const SortContext&, const S&) override {
    std::vector<std::size_t> order;
    order.reserve(applicable.size());
    for (const auto& ref : applicable) order.push_back(ref.index);
    return order;
  }
};

/// Sequence arbitration: a cursor walks the registration order cyclically.
/// The cursor option is preferred while it stays applicable and committed;
/// once it loses commitment (or drops out of the applicable set) the cursor
/// advances, wrapping, to the next applicable option. Remaining options
/// follow in cyclic order.
template <typename S, typename C>
class SequenceStrategy : public Strategy<S, C> {
 public:
  std::vector<std::size_t> sortOptions(const std::vector<OptionRef<S, C>>& applicable,
                                       const SortContext& context, const S&) override {
    if (applicable.empty()) return {};

    const bool cursor_applicable =
        contains(applicable, cursor_) || (context.committed_pinned && context.committed == cursor_);
    const bool cursor_released =
        context.active == cursor_ && context.committed != cursor_ && context.active.has_value();

    if (!cursor_applicable || cursor_released) {
      cursor_ = nextApplicableAfter(cursor_, applicable, context.option_count);
    }

    // Cyclic order starting at the cursor. When the cursor option was pinned
    // by the arbitrator it is absent from the input, so the scan naturally
    // begins right after it.
    std::vector<std::size_t> order;
    order.reserve(applicable.size());
    for (std::size_t offset = 0; offset < context.option_count; ++offset) {
      const std::size_t candidate = (cursor_ + offset) % context.option_count;
      if (contains(applicable, candidate)) order.push_back(candidate);
    }
    return order;
  }

  std::size_t cursor() const { return cursor_; }

 private:
  static bool contains(const std::vector<OptionRef<S, C>>& refs, std::size_t index) {
    return std::any_of(refs.begin(), refs.end(),
                       [index](const OptionRef<S, C>& ref) { return ref.index == index; });
  }

  static std::size_t nextApplicableAfter(std::size_t from,
                                         const std::vector<OptionRef<S, C>>& applicable,
                                         std::size_t option_count) {
    for (std::size_t offset = 1; offset <= option_count; ++offset) {
      const std::size_t candidate = (from + offset) % option_count;
      if (contains(applicable, candidate)) return candidate;
    }
    return from;
  }

  std::size_t cursor_ = 0;
};

/// Cost arbitration: ascending estimated cost, ties by registration index.
/// The estimator runs at most once per option per step; an estimator that
/// throws sorts that option last and the error is recorded for inspection.
template <typename S, typename C>
class CostStrategy : public Strategy<S, C> {
 public:
  using Estimator = std::function<double(const Behavior<S, C>& option, const S& situation)>;

  explicit CostStrategy(Estimator estimator) : estimator_(std::move(estimator)) {
    if (!estimator_) throw std::invalid_argument("CostStrategy: null estimator");
  }

  /// Convenience: fixed cost per option name; unnamed options cost 0.
  static std::unique_ptr<CostStrategy> fromCostMap(std::map<std::string, double> costs) {
    return std::make_unique<CostStrategy>(
        [costs = std::move(costs)](const Behavior<S, C>& option, const S&) {
          auto it = costs.find(option.name());
          return it != costs.end() ? it->second : 0.0;
        });
  }

  std::vector<std::size_t> sortOptions(const std::vector<OptionRef<S, C>>& applicable,
                                       const SortContext&, const S& situation) override {
    last_errors_.clear();
    struct Entry {
      std::size_t index;
      double cost;
    };
    std::vector<Entry> entries;
    entries.reserve(applicable.size());
    for (const auto& ref : applicable) {
      double cost = std::numeric_limits<double>::infinity();
      try {
        cost = estimator_(*ref.behavior, situation);
      } catch (const std::exception& e) {
        last_errors_.emplace_back(ref.behavior->name(), e.what());
      } catch (...) {
        last_errors_.emplace_back(ref.behavior->name(), "unknown error");
      }
      entries.push_back(Entry{ref.index, cost});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.cost != b.cost) return a.cost < b.cost;
      return a.index < b.index;
    });
    std::vector<std::size_t> order;
    order.reserve(entries.size());
    for (const auto& entry : entries) order.push_back(entry.index);
    return order;
  }

  /// (option name, error message) pairs from the most recent sort.
  const std::vector<std::pair<std::string, std::string>>& lastErrors() const {
    return last_errors_;
  }

 private:
  Estimator estimator_;
  std::vector<std::pair<std::string, std::string>> last_errors_;
};

/// Random arbitration: weighted sampling without replacement, reproducible
/// from the seed. Weights align with registration indices; options beyond
/// the weight list default to 1. The generator advances only when a sort
/// actually runs.
template <typename S, typename C>
class RandomStrategy : public Strategy<S, C> {
 public:
  explicit RandomStrategy(std::uint64_t seed, std::vector<double> weights = {})
      : rng_(seed), weights_(std::move(weights)) {
    for (double w : weights_) {
      if (!(w > 0.0)) {
        throw std::invalid_argument("RandomStrategy: option weights must be positive");
      }
    }
  }

  std::vector<std::size_t> sortOptions(const std::vector<OptionRef<S, C>>& applicable,
                                       const SortContext&, const S&) override {
    std::vector<std::size_t> pool;
    pool.reserve(applicable.size());
    for (const auto& ref : applicable) pool.push_back(ref.index);

    std::vector<std::size_t> order;
    order.reserve(pool.size());
    while (!pool.empty()) {
      double total = 0.0;
      for (std::size_t index : pool) total += weightOf(index);
      double pick = rng_.nextDouble() * total;
      std::size_t chosen_at = pool.size() - 1;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        pick -= weightOf(pool[i]);
        if (pick < 0.0) {
          chosen_at = i;
          break;
        }
      }
      order.push_back(pool[chosen_at]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen_at));
    }
    return order;
  }

 private:
  double weightOf(std::size_t index) const {
    return index < weights_.size() ? weights_[index] : 1.0;
  }

  Rng rng_;
  std::vector<double> weights_;
};

}  // namespace arbgraph
