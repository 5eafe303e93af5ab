#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arbgraph/core.hpp"

namespace arbgraph {

/// Structured record of one arbitration step over the whole graph: which
/// options were applicable, committed, rejected (and why) or chosen. Nodes
/// are stored in preorder; tree structure is encoded in the name paths
/// ("Root/UrbanDriving/FollowLane").
struct GraphSnapshot {
  enum class NodeKind { kBehavior, kArbitrator };

  struct Node {
    std::string path;
    NodeKind kind = NodeKind::kBehavior;
    bool applicable = false;
    bool committed = false;
    OptionVerification verification = OptionVerification::kNotEvaluated;
    std::string detail;  // only meaningful when verification == kFailed
    bool chosen = false;

    bool operator==(const Node&) const = default;

    std::string_view name() const {
      auto slash = path.rfind('/');
      return slash == std::string::npos ? std::string_view(path)
                                        : std::string_view(path).substr(slash + 1);
    }
  };

  long step = 0;
  std::vector<Node> nodes;

  bool operator==(const GraphSnapshot&) const = default;

  /// Leaf-most chosen node, or nullptr when the step ended NO_SAFE_OPTION.
  const Node* chosenLeaf() const {
    const Node* leaf = nullptr;
    for (const auto& node : nodes) {
      if (node.chosen && (!leaf || node.path.size() > leaf->path.size())) leaf = &node;
    }
    return leaf;
  }
};

class SnapshotParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename S, typename C>
void captureArbitrator(const Arbitrator<S, C>& arbitrator, const std::string& path, bool chosen,
                       GraphSnapshot& snapshot) {
  const StepTrace& trace = arbitrator.stepTrace();
  const auto& options = arbitrator.options();

  for (std::size_t i = 0; i < options.size(); ++i) {
    GraphSnapshot::Node node;
    node.path = path + "/" + options[i].child->name();
    if (trace.evaluated && i < trace.options.size()) {
      const OptionTrace& record = trace.options[i];
      node.applicable = record.applicable;
      node.committed = record.committed;
      node.verification = record.verification;
      node.detail = record.verification == OptionVerification::kFailed ? record.detail : "";
      node.chosen = chosen && record.chosen;
    }
    const auto* child_arbitrator = dynamic_cast<const Arbitrator<S, C>*>(options[i].child.get());
    node.kind = child_arbitrator ? GraphSnapshot::NodeKind::kArbitrator
                                 : GraphSnapshot::NodeKind::kBehavior;
    const std::string child_path = node.path;
    const bool child_chosen = node.chosen;
    snapshot.nodes.push_back(std::move(node));
    if (child_arbitrator) {
      captureArbitrator(*child_arbitrator, child_path, child_chosen, snapshot);
    }
  }
}

}  // namespace detail

/// Captures the given arbitrator's evaluation of the step that just ran.
/// Reads only the traces recorded during bestOption, so capturing never
/// perturbs graph state.
template <typename S, typename C>
GraphSnapshot capture(const Arbitrator<S, C>& root, long step) {
  GraphSnapshot snapshot;
  snapshot.step = step;

  const StepTrace& trace = root.stepTrace();
  GraphSnapshot::Node node;
  node.path = root.name();
  node.kind = GraphSnapshot::NodeKind::kArbitrator;
  bool root_chosen = false;
  if (trace.evaluated) {
    for (const auto& record : trace.options) {
      node.applicable = node.applicable || record.applicable;
      node.committed = node.committed || record.committed;
    }
    root_chosen = trace.outcome == VerificationStatus::kPassed;
  }
  node.chosen = root_chosen;
  snapshot.nodes.push_back(std::move(node));

  detail::captureArbitrator(root, root.name(), root_chosen, snapshot);
  return snapshot;
}

namespace detail {

inline std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  out += "\"";
  return out;
}

inline const char* verificationLabel(OptionVerification v) {
  switch (v) {
    case OptionVerification::kNotEvaluated: return "not-evaluated";
    case OptionVerification::kPassed: return "passed";
    case OptionVerification::kFailed: return "failed";
    case OptionVerification::kExempt: return "exempt";
  }
  return "not-evaluated";
}

}  // namespace detail

/// Line-based, human-diffable document; stable key order so regression
/// tests can compare files byte for byte.
inline std::string serialize(const GraphSnapshot& snapshot) {
  std::ostringstream out;
  out << "arbgraph-snapshot v1\n";
  out << "step " << snapshot.step << "\n";
  for (const auto& node : snapshot.nodes) {
    out << "node path=" << detail::quote(node.path)
        << " kind=" << (node.kind == GraphSnapshot::NodeKind::kArbitrator ? "arbitrator" : "behavior")
        << " applicable=" << (node.applicable ? "true" : "false")
        << " committed=" << (node.committed ? "true" : "false")
        << " verification=" << detail::verificationLabel(node.verification);
    if (node.verification == OptionVerification::kFailed) {
      out << " detail=" << detail::quote(node.detail);
    }
    out << " chosen=" << (node.chosen ? "true" : "false") << "\n";
  }
  return out.str();
}

namespace detail {

struct FieldCursor {
  std::string_view text;
  std::size_t pos = 0;
  int line = 0;

  void skipSpaces() {
    while (pos < text.size() && text[pos] == ' ') ++pos;
  }

  bool done() {
    skipSpaces();
    return pos >= text.size();
  }

  // key=value; value is quoted or a bare token.
  std::pair<std::string, std::string> nextField(const std::string& path_for_errors) {
    skipSpaces();
    auto eq = text.find('=', pos);
    if (eq == std::string_view::npos) {
      throw SnapshotParseError("snapshot parse error at line " + std::to_string(line) + " (path " +
                               path_for_errors + "): malformed field near '" +
                               std::string(text.substr(pos)) + "'");
    }
    std::string key(text.substr(pos, eq - pos));
    pos = eq + 1;
    std::string value;
    if (pos < text.size() && text[pos] == '"') {
      ++pos;
      bool closed = false;
      while (pos < text.size()) {
        char c = text[pos++];
        if (c == '\\' && pos < text.size()) {
          char esc = text[pos++];
          if (esc == 'n') value += '\n';
          else if (esc == '"') value += '"';
          else if (esc == '\\') value += '\\';
          else
            throw SnapshotParseError("snapshot parse error at line " + std::to_string(line) +
                                     " (path " + path_for_errors + "): bad escape '\\" +
                                     std::string(1, esc) + "'");
        } else if (c == '"') {
          closed = true;
          break;
        } else {
          value += c;
        }
      }
      if (!closed) {
        throw SnapshotParseError("snapshot parse error at line " + std::to_string(line) + " (path " +
                                 path_for_errors + "): unterminated quote in field '" + key + "'");
      }
    } else {
      auto space = text.find(' ', pos);
      if (space == std::string_view::npos) space = text.size();
      value = std::string(text.substr(pos, space - pos));
      pos = space;
    }
    return {std::move(key), std::move(value)};
  }
};

inline bool parseBool(const std::string& value, const std::string& key, const std::string& path,
                      int line) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw SnapshotParseError("snapshot parse error at line " + std::to_string(line) + " (path " +
                           path + "): field '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace detail

/// Inverse of serialize(). Rejects unknown fields and malformed markers,
/// naming the offending node path in the error.
inline GraphSnapshot deserialize(const std::string& document) {
  std::istringstream in(document);
  std::string line;
  int line_no = 0;

  auto next_line = [&](std::string& out) {
    if (!std::getline(in, out)) return false;
    ++line_no;
    return true;
  };

  if (!next_line(line) || line != "arbgraph-snapshot v1") {
    throw SnapshotParseError("snapshot parse error at line 1: missing 'arbgraph-snapshot v1' header");
  }
  if (!next_line(line) || line.rfind("step ", 0) != 0) {
    throw SnapshotParseError("snapshot parse error at line 2: missing 'step <n>' line");
  }
  GraphSnapshot snapshot;
  try {
    snapshot.step = std::stol(line.substr(5));
  } catch (const std::exception&) {
    throw SnapshotParseError("snapshot parse error at line 2: malformed step number '" +
                             line.substr(5) + "'");
  }

  while (next_line(line)) {
    if (line.empty()) continue;
    if (line.rfind("node ", 0) != 0) {
      throw SnapshotParseError("snapshot parse error at line " + std::to_string(line_no) +
                               ": expected 'node ...', got '" + line + "'");
    }
    detail::FieldCursor cursor{line, 5, line_no};
    GraphSnapshot::Node node;
    bool saw_path = false, saw_kind = false, saw_verification = false, saw_detail = false;
    std::string path_label = "<unknown>";
    while (!cursor.done()) {
      auto [key, value] = cursor.nextField(path_label);
      if (key == "path") {
        node.path = value;
        path_label = detail::quote(node.path);
        saw_path = true;
      } else if (key == "kind") {
        if (value == "arbitrator") node.kind = GraphSnapshot::NodeKind::kArbitrator;
        else if (value == "behavior") node.kind = GraphSnapshot::NodeKind::kBehavior;
        else
          throw SnapshotParseError("snapshot parse error at line " + std::to_string(line_no) +
                                   " (path " + path_label + "): unknown kind '" + value + "'");
        saw_kind = true;
      } else if (key == "applicable") {
        node.applicable = detail::parseBool(value, key, path_label, line_no);
      } else if (key == "committed") {
        node.committed = detail::parseBool(value, key, path_label, line_no);
      } else if (key == "verification") {
        if (value == "not-evaluated") node.verification = OptionVerification::kNotEvaluated;
        else if (value == "passed") node.verification = OptionVerification::kPassed;
        else if (value == "failed") node.verification = OptionVerification::kFailed;
        else if (value == "exempt") node.verification = OptionVerification::kExempt;
        else
          throw SnapshotParseError("snapshot parse error at line " + std::to_string(line_no) +
                                   " (path " + path_label + "): unknown verification marker '" +
                                   value + "'");
        saw_verification = true;
      } else if (key == "detail") {
        node.detail = value;
        saw_detail = true;
      } else if (key == "chosen") {
        node.chosen = detail::parseBool(value, key, path_label, line_no);
      } else {
        throw SnapshotParseError("snapshot parse error at line " + std::to_string(line_no) +
                                 " (path " + path_label + "): unknown field '" + key + "'");
      }
    }
    if (!saw_path || !saw_kind || !saw_verification) {
      throw SnapshotParseError("snapshot parse error at line " + std::to_string(line_no) +
                               " (path " + path_label + "): missing required fields");
    }
    if (saw_detail && node.verification != OptionVerification::kFailed) {
      throw SnapshotParseError("snapshot parse error at line " + std::to_string(line_no) +
                               " (path " + path_label + "): detail only allowed when failed");
    }
    snapshot.nodes.push_back(std::move(node));
  }
  return snapshot;
}

/// One node per line with markers for applicable/committed/rejected/chosen/
/// exempt; indentation mirrors the tree depth.
inline std::string renderText(const GraphSnapshot& snapshot) {
  std::ostringstream out;
  out << "step " << snapshot.step << "\n";
  for (const auto& node : snapshot.nodes) {
    std::size_t depth = 0;
    for (char c : node.path) {
      if (c == '/') ++depth;
    }
    for (std::size_t i = 0; i < depth; ++i) out << "  ";
    out << node.name() << " ["
        << (node.kind == GraphSnapshot::NodeKind::kArbitrator ? "arbitrator" : "behavior") << "]";
    if (node.applicable) out << " applicable";
    if (node.committed) out << " committed";
    switch (node.verification) {
      case OptionVerification::kNotEvaluated: break;
      case OptionVerification::kPassed: out << " passed"; break;
      case OptionVerification::kFailed: out << " rejected(" << node.detail << ")"; break;
      case OptionVerification::kExempt: out << " exempt"; break;
    }
    if (node.chosen) out << " chosen";
    out << "\n";
  }
  return out.str();
}

/// Ordered record of which leaf was chosen at each step. Steps must arrive
/// strictly increasing by 1.
class Timeline {
 public:
  static constexpr const char* kNoSafeOptionLabel = "NO_SAFE_OPTION";

  void append(long step, std::string chosen_leaf) {
    if (!entries_.empty() && step != entries_.back().first + 1) {
      throw std::logic_error("Timeline: steps must increase by 1 (got " + std::to_string(step) +
                             " after " + std::to_string(entries_.back().first) + ")");
    }
    entries_.emplace_back(step, std::move(chosen_leaf));
  }

  const std::vector<std::pair<long, std::string>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::string toCsv() const {
    std::string out = "step,chosen\n";
    for (const auto& [step, chosen] : entries_) {
      out += std::to_string(step);
      out += ',';
      out += chosen;
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::pair<long, std::string>> entries_;
};

/// Name of the chosen leaf for this step's evaluation, or the
/// NO_SAFE_OPTION label.
template <typename S, typename C>
std::string chosenLeafName(const Arbitrator<S, C>& root) {
  const Arbitrator<S, C>* arbitrator = &root;
  while (true) {
    const StepTrace& trace = arbitrator->stepTrace();
    if (!trace.evaluated || trace.outcome != VerificationStatus::kPassed) {
      return Timeline::kNoSafeOptionLabel;
    }
    std::size_t chosen = trace.options.size();
    for (std::size_t i = 0; i < trace.options.size(); ++i) {
      if (trace.options[i].chosen) {
        chosen = i;
        break;
      }
    }
    if (chosen == trace.options.size()) return Timeline::kNoSafeOptionLabel;
    const auto& child = arbitrator->options()[chosen].child;
    const auto* nested = dynamic_cast<const Arbitrator<S, C>*>(child.get());
    if (!nested) return child->name();
    arbitrator = nested;
  }
}

}  // namespace arbgraph
