#pragma once

// Network data model for discrete chance-node knowledge bases: variables,
// parent lists, conditional probability tables, and the parent-configuration
// indexing every other part of the library relies on.
//
// Rows of a CPT are indexed by the mixed-radix encoding of the parent
// configuration, parents taken in declaration order with the LAST parent
// varying fastest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbm {

// Row-sum tolerance for stored and elicited distributions.
inline constexpr double kRowTolerance = 1e-9;

class MaintenanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Variable {
  std::string id;
  std::string name;
  std::vector<std::string> outcomes;

  std::optional<std::size_t> outcome_index(const std::string& label) const {
    auto it = std::find(outcomes.begin(), outcomes.end(), label);
    if (it == outcomes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - outcomes.begin());
  }

  bool operator==(const Variable&) const = default;
};

struct Cpt {
  std::string node;
  std::vector<std::string> parent_order;
  std::vector<std::vector<double>> rows;

  bool operator==(const Cpt&) const = default;
};

struct ParentConfig {
  std::vector<std::size_t> assignment;

  auto operator<=>(const ParentConfig&) const = default;
};

// Which edit left a successor waiting for its table to be re-encoded.
enum class PendingKind { AddedOutcomes, SplitOutcome };

// A successor whose parent changed outcome space. Its Cpt is still the one
// from before the change; `source_outcome[i]` tells which old parent outcome
// (if any) the parent's new outcome i descends from for verbatim reuse.
struct PendingReassessment {
  std::string successor;
  std::string changed_parent;
  PendingKind kind = PendingKind::AddedOutcomes;
  std::size_t old_parent_outcomes = 0;
  std::vector<std::optional<std::size_t>> source_outcome;

  bool operator==(const PendingReassessment&) const = default;
};

struct Network {
  std::string version_label;
  std::vector<Variable> variables;
  std::map<std::string, std::vector<std::string>> parents;
  std::map<std::string, Cpt> cpts;
  std::vector<PendingReassessment> pending;

  const Variable* find(const std::string& id) const {
    for (const auto& v : variables)
      if (v.id == id) return &v;
    return nullptr;
  }

  Variable* find(const std::string& id) {
    for (auto& v : variables)
      if (v.id == id) return &v;
    return nullptr;
  }

  const Variable& at(const std::string& id) const {
    if (const auto* v = find(id)) return *v;
    throw MaintenanceError("unknown variable '" + id + "'");
  }

  const std::vector<std::string>& parents_of(const std::string& id) const {
    static const std::vector<std::string> kNone;
    auto it = parents.find(id);
    return it == parents.end() ? kNone : it->second;
  }

  std::vector<std::string> children_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& v : variables) {
      const auto& ps = parents_of(v.id);
      if (std::find(ps.begin(), ps.end(), id) != ps.end()) out.push_back(v.id);
    }
    return out;
  }

  const PendingReassessment* pending_for(const std::string& successor) const {
    for (const auto& p : pending)
      if (p.successor == successor) return &p;
    return nullptr;
  }

  bool operator==(const Network&) const = default;
};

// ---------------------------------------------------------------------------
// Parent-configuration indexing

inline std::size_t config_count(std::span<const std::size_t> radices) {
  std::size_t n = 1;
  for (auto r : radices) {
    if (r != 0 && n > static_cast<std::size_t>(-1) / r)
      throw std::overflow_error("configuration count overflows");
    n *= r;
  }
  return n;
}

inline std::size_t config_index(const ParentConfig& config,
                                std::span<const std::size_t> radices) {
  if (config.assignment.size() != radices.size())
    throw std::out_of_range("configuration has " +
                            std::to_string(config.assignment.size()) +
                            " entries, expected " +
                            std::to_string(radices.size()));
  std::size_t index = 0;
  for (std::size_t i = 0; i < radices.size(); ++i) {
    if (config.assignment[i] >= radices[i])
      throw std::out_of_range("outcome index " +
                              std::to_string(config.assignment[i]) +
                              " out of range for radix " +
                              std::to_string(radices[i]));
    index = index * radices[i] + config.assignment[i];
  }
  return index;
}

inline ParentConfig config_at(std::size_t index,
                              std::span<const std::size_t> radices) {
  if (index >= config_count(radices))
    throw std::out_of_range("configuration index out of range");
  ParentConfig c;
  c.assignment.resize(radices.size());
  for (std::size_t i = radices.size(); i-- > 0;) {
    c.assignment[i] = index % radices[i];
    index /= radices[i];
  }
  return c;
}

inline std::vector<ParentConfig> enumerate_configs(
    std::span<const std::size_t> radices) {
  const std::size_t n = config_count(radices);
  std::vector<ParentConfig> out;
  out.reserve(n);
  ParentConfig c;
  c.assignment.assign(radices.size(), 0);
  for (std::size_t j = 0; j < n; ++j) {
    out.push_back(c);
    for (std::size_t i = radices.size(); i-- > 0;) {
      if (++c.assignment[i] < radices[i]) break;
      c.assignment[i] = 0;
    }
  }
  return out;
}

// Current outcome counts of `node`'s parents, in parent order.
inline std::vector<std::size_t> parent_radices(const Network& net,
                                               const std::string& node) {
  std::vector<std::size_t> r;
  for (const auto& p : net.parents_of(node)) r.push_back(net.at(p).outcomes.size());
  return r;
}

inline std::vector<ParentConfig> enumerate_configs(const Network& net,
                                                   const std::string& node) {
  net.at(node);
  const auto radices = parent_radices(net, node);
  return enumerate_configs(radices);
}

// "P=p1, Q=q2" for diagnostics and diffs.
inline std::string describe_config(const Network& net, const std::string& node,
                                   const ParentConfig& config) {
  const auto& ps = net.parents_of(node);
  std::string s;
  for (std::size_t i = 0; i < ps.size() && i < config.assignment.size(); ++i) {
    if (!s.empty()) s += ", ";
    const auto* v = net.find(ps[i]);
    s += ps[i] + "=" +
         (v && config.assignment[i] < v->outcomes.size()
              ? v->outcomes[config.assignment[i]]
              : std::to_string(config.assignment[i]));
  }
  return "{" + s + "}";
}

// ---------------------------------------------------------------------------
// Validation

struct Finding {
  std::string node;
  std::string invariant;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
};

namespace detail {

inline std::string fmt_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// Returns one directed cycle (node ids in traversal order) or empty.
inline std::vector<std::string> find_cycle(const Network& net) {
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  for (const auto& v : net.variables) mark[v.id] = Mark::White;
  std::vector<std::string> stack;
  std::vector<std::string> cycle;

  // Walks child -> parent edges reversed: an arc p -> c means c lists p.
  // We traverse arcs forward (parent to child) so cycles read in arc order.
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& v : net.variables)
    for (const auto& p : net.parents_of(v.id))
      if (mark.count(p)) children[p].push_back(v.id);

  auto dfs = [&](auto&& self, const std::string& id) -> bool {
    mark[id] = Mark::Grey;
    stack.push_back(id);
    for (const auto& c : children[id]) {
      if (mark[c] == Mark::Grey) {
        auto it = std::find(stack.begin(), stack.end(), c);
        cycle.assign(it, stack.end());
        return true;
      }
      if (mark[c] == Mark::White && self(self, c)) return true;
    }
    stack.pop_back();
    mark[id] = Mark::Black;
    return false;
  };
  for (const auto& v : net.variables)
    if (mark[v.id] == Mark::White && dfs(dfs, v.id)) return cycle;
  return {};
}

}  // namespace detail

inline bool is_acyclic(const Network& net) { return detail::find_cycle(net).empty(); }

// True when `target` can be reached from `from` along arcs.
inline bool reachable(const Network& net, const std::string& from,
                      const std::string& target) {
  std::vector<std::string> todo{from};
  std::vector<std::string> seen;
  while (!todo.empty()) {
    auto id = todo.back();
    todo.pop_back();
    if (id == target) return true;
    if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
    seen.push_back(id);
    for (auto& c : net.children_of(id)) todo.push_back(c);
  }
  return false;
}

inline ValidationReport validate_network(const Network& net,
                                         double tolerance = kRowTolerance) {
  ValidationReport report;
  auto add = [&](const std::string& node, const char* inv, std::string msg) {
    report.findings.push_back({node, inv, std::move(msg)});
  };

  std::map<std::string, int> seen;
  for (const auto& v : net.variables) {
    if (v.id.empty()) add(v.id, "id", "variable with empty id");
    if (++seen[v.id] == 2) add(v.id, "unique-id", "duplicate variable id " + v.id);
    if (v.outcomes.empty())
      add(v.id, "outcomes", "variable " + v.id + " has no outcomes");
    for (std::size_t i = 0; i < v.outcomes.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (v.outcomes[i] == v.outcomes[j])
          add(v.id, "unique-outcome",
              "variable " + v.id + " repeats outcome " + v.outcomes[i]);
  }

  for (const auto& [id, ps] : net.parents) {
    if (!seen.count(id)) {
      add(id, "parent-resolves", "parents listed for undeclared variable " + id);
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (!seen.count(ps[i])) {
        add(id, "parent-resolves",
            "parent " + ps[i] + " of node " + id + " is not declared");
      }
      for (std::size_t j = 0; j < i; ++j)
        if (ps[i] == ps[j])
          add(id, "unique-parent", "node " + id + " lists parent " + ps[i] + " twice");
    }
  }

  if (auto cycle = detail::find_cycle(net); !cycle.empty()) {
    std::string s;
    for (const auto& c : cycle) s += (s.empty() ? "" : ",") + c;
    add(cycle.front(), "acyclic", "cycle " + s);
  }

  for (const auto& [id, cpt] : net.cpts)
    if (!seen.count(id)) add(id, "cpt-node", "cpt for undeclared variable " + id);

  for (const auto& v : net.variables) {
    auto it = net.cpts.find(v.id);
    if (it == net.cpts.end()) {
      add(v.id, "cpt-present", "node " + v.id + " has no cpt");
      continue;
    }
    const Cpt& cpt = it->second;
    const auto& ps = net.parents_of(v.id);
    if (cpt.node != v.id)
      add(v.id, "cpt-node", "cpt of node " + v.id + " is labelled " + cpt.node);
    if (cpt.parent_order != ps)
      add(v.id, "cpt-parents", "cpt parent order of node " + v.id +
                                   " differs from its parent list");
    if (!std::all_of(ps.begin(), ps.end(), [&](const auto& p) { return seen.count(p) > 0; }))
      continue;

    std::vector<std::size_t> radices;
    for (const auto& p : ps) radices.push_back(net.at(p).outcomes.size());
    if (const auto* pend = net.pending_for(v.id)) {
      // A pending node keeps its pre-edit table until re-encoded.
      auto pos = std::find(ps.begin(), ps.end(), pend->changed_parent);
      if (pos != ps.end())
        radices[static_cast<std::size_t>(pos - ps.begin())] = pend->old_parent_outcomes;
    }
    std::size_t expected_rows = 0;
    try {
      expected_rows = config_count(radices);
    } catch (const std::overflow_error&) {
      add(v.id, "cpt-shape", "node " + v.id + " has too many parent configurations");
      continue;
    }
    if (cpt.rows.size() != expected_rows) {
      add(v.id, "cpt-shape", "node " + v.id + " has " +
                                 std::to_string(cpt.rows.size()) + " rows, expected " +
                                 std::to_string(expected_rows));
      continue;
    }
    for (std::size_t j = 0; j < cpt.rows.size(); ++j) {
      const auto& row = cpt.rows[j];
      if (row.size() != v.outcomes.size()) {
        add(v.id, "cpt-shape", "row " + std::to_string(j) + " of node " + v.id +
                                   " has " + std::to_string(row.size()) +
                                   " entries, expected " +
                                   std::to_string(v.outcomes.size()));
        continue;
      }
      double sum = 0.0;
      bool range_ok = true;
      for (double x : row) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) range_ok = false;
        sum += x;
      }
      if (!range_ok)
        add(v.id, "entry-range", "row " + std::to_string(j) + " of node " + v.id +
                                     " has an entry outside [0, 1]");
      else if (std::abs(sum - 1.0) > tolerance)
        add(v.id, "row-sum", "row " + std::to_string(j) + " of node " + v.id +
                                 " sums to " + detail::fmt_number(sum));
    }
  }
  return report;
}

}  // namespace kbm
