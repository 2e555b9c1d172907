#pragma once

// Structural edits applied as pure transactions Network -> Transaction.
//
// Three special cases let existing probabilities survive a change in the
// state of information:
//   * ignored outcome: new outcomes are appended; old entries are scaled by
//     the complement of the new outcomes' elicited mass.
//   * split outcome: one outcome becomes k parts sharing its old mass;
//     every other entry is copied.
//   * assumed constant: a node gaining parent A copies its old table into the
//     block conditioned on the baseline outcome of A.
// Whether a special case applies is the caller's judgement; nothing here
// tries to infer it.
//
// An outcome-space change leaves the changed node's successors pending until
// each one is re-encoded, either by reusing its old rows or by a replacement
// table. While anything is pending only those resolving edits are accepted.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kbmaint/cost.hpp"
#include "kbmaint/edit.hpp"
#include "kbmaint/network.hpp"

namespace kbm {

namespace detail {

inline std::string advance_label(const std::string& label) {
  auto tick = label.rfind('\'');
  if (tick != std::string::npos && tick + 1 < label.size()) {
    auto digits = label.substr(tick + 1);
    if (std::all_of(digits.begin(), digits.end(),
                    [](char c) { return c >= '0' && c <= '9'; }) &&
        digits.size() < 18) {
      return label.substr(0, tick + 1) + std::to_string(std::stoull(digits) + 1);
    }
  }
  return label + "'1";
}

inline void require_valid(const Network& net) {
  auto report = validate_network(net);
  if (!report.ok())
    throw MaintenanceError("input network is invalid: " + report.findings.front().message);
}

inline void require_no_pending(const Network& net) {
  if (net.pending.empty()) return;
  std::string s;
  for (const auto& p : net.pending) s += (s.empty() ? "" : ", ") + p.successor;
  throw MaintenanceError("unresolved successors must be re-encoded first: " + s);
}

inline void require_labels(const std::vector<std::string>& labels,
                           const std::vector<std::string>& existing,
                           const std::string& node) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty()) throw MaintenanceError("empty outcome label for node " + node);
    for (std::size_t j = 0; j < i; ++j)
      if (labels[i] == labels[j])
        throw MaintenanceError("outcome label " + labels[i] + " given twice");
    if (std::find(existing.begin(), existing.end(), labels[i]) != existing.end())
      throw MaintenanceError("outcome label " + labels[i] + " already exists on node " + node);
  }
}

inline void require_entries(const std::vector<double>& probs, const std::string& where) {
  for (double x : probs)
    if (!std::isfinite(x) || x < 0.0 || x > 1.0)
      throw MaintenanceError("elicited value " + fmt_number(x) + " outside [0, 1] for " + where);
}

inline void require_full_row(const std::vector<double>& probs, const std::string& where) {
  require_entries(probs, where);
  double sum = 0.0;
  for (double x : probs) sum += x;
  if (std::abs(sum - 1.0) > kRowTolerance)
    throw MaintenanceError("elicited row for " + where + " sums to " + fmt_number(sum));
}

// Maps label-keyed elicited rows onto configuration indices over
// `parent_ids` (outcome labels read from `work`). Every index accepted by
// `wanted` must be supplied exactly once and nothing else may be.
inline std::map<std::size_t, std::vector<double>> resolve_rows(
    const Network& work, const std::string& node,
    const std::vector<std::string>& parent_ids, const Elicitation& rows,
    std::size_t width, const std::function<bool(std::size_t)>& wanted) {
  std::vector<std::size_t> radices;
  for (const auto& p : parent_ids) radices.push_back(work.at(p).outcomes.size());

  std::map<std::size_t, std::vector<double>> out;
  for (const auto& row : rows) {
    ParentConfig cfg;
    for (const auto& [key, label] : row.given)
      if (std::find(parent_ids.begin(), parent_ids.end(), key) == parent_ids.end())
        throw MaintenanceError("elicited row for " + node + " conditions on " + key +
                               ", which is not a parent");
    for (const auto& p : parent_ids) {
      auto it = row.given.find(p);
      if (it == row.given.end())
        throw MaintenanceError("elicited row for " + node + " lacks an outcome for parent " + p);
      auto idx = work.at(p).outcome_index(it->second);
      if (!idx)
        throw MaintenanceError("unknown outcome " + it->second + " of parent " + p);
      cfg.assignment.push_back(*idx);
    }
    const std::size_t j = config_index(cfg, radices);
    const std::string where = node + " " + [&] {
      std::string s;
      for (const auto& p : parent_ids)
        s += (s.empty() ? "" : ", ") + p + "=" + row.given.at(p);
      return "{" + s + "}";
    }();
    if (!wanted(j))
      throw MaintenanceError("row " + where + " is reused and must not be elicited");
    if (out.count(j)) throw MaintenanceError("row " + where + " elicited twice");
    if (row.probs.size() != width)
      throw MaintenanceError("row " + where + " has " + std::to_string(row.probs.size()) +
                             " values, expected " + std::to_string(width));
    out.emplace(j, row.probs);
  }
  const std::size_t n = config_count(radices);
  for (std::size_t j = 0; j < n; ++j) {
    if (wanted(j) && !out.count(j)) {
      auto cfg = config_at(j, radices);
      std::string s;
      for (std::size_t i = 0; i < parent_ids.size(); ++i)
        s += (s.empty() ? "" : ", ") + parent_ids[i] + "=" +
             work.at(parent_ids[i]).outcomes[cfg.assignment[i]];
      throw MaintenanceError("missing elicited row for " + node + " {" + s + "}");
    }
  }
  return out;
}

inline std::string row_where(const Network& net, const std::string& node, std::size_t j) {
  auto radices = parent_radices(net, node);
  return node + " " + describe_config(net, node, config_at(j, radices));
}

inline Transaction finish(const Network& before, EditOp op, Network after,
                          std::vector<NodeProvenance> provenance,
                          std::optional<RescaleFactors> factors) {
  after.version_label = advance_label(before.version_label);
  auto check = validate_network(after);
  if (!check.ok())
    throw MaintenanceError("edit would produce an invalid network: " +
                           check.findings.front().message);
  Transaction t{before, std::move(op), std::move(after), std::move(provenance), {},
                std::move(factors)};
  t.report = audit_transaction(t);
  return t;
}

inline NodeProvenance elicited_table(const std::string& node, std::size_t rows,
                                     std::size_t outcomes) {
  NodeProvenance prov{node, {}, outcomes - 1, false};
  prov.rows.assign(rows, RowProvenance{outcomes - 1, 0});
  return prov;
}

// Fully elicited table over the node's current parents in `work`.
inline std::vector<std::vector<double>> full_table(const Network& work,
                                                   const std::string& node,
                                                   const Elicitation& e) {
  const auto& var = work.at(node);
  const auto& ps = work.parents_of(node);
  auto rows = resolve_rows(work, node, ps, e, var.outcomes.size(),
                           [](std::size_t) { return true; });
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (auto& [j, row] : rows) {
    require_full_row(row, row_where(work, node, j));
    out.push_back(std::move(row));
  }
  return out;
}

inline void mark_successors_pending(Network& after, const std::string& node,
                                    PendingKind kind, std::size_t old_count,
                                    std::vector<std::optional<std::size_t>> source) {
  for (const auto& child : after.children_of(node))
    after.pending.push_back({child, node, kind, old_count, source});
}

// Adds arc from -> to on `work` (appended as the last parent of `to`) and
// re-encodes `to`. With a baseline, rows for that outcome of `from` are the
// old table copied verbatim and only the rest are elicited.
inline NodeProvenance add_arc_in_place(Network& work, const std::string& from,
                                       const std::string& to,
                                       const std::optional<std::string>& baseline,
                                       const Elicitation& e) {
  if (from == to) throw MaintenanceError("arc " + from + "->" + to + " is a self loop");
  const auto& a = work.at(from);
  const auto& b = work.at(to);
  const auto& ps = work.parents_of(to);
  if (std::find(ps.begin(), ps.end(), from) != ps.end())
    throw MaintenanceError("arc " + from + "->" + to + " already exists");
  if (reachable(work, to, from))
    throw MaintenanceError("arc " + from + "->" + to + " would create a cycle");

  std::optional<std::size_t> base;
  if (baseline) {
    base = a.outcome_index(*baseline);
    if (!base)
      throw MaintenanceError("baseline " + *baseline + " is not an outcome of " + from);
  }
  const std::size_t arity = a.outcomes.size();
  const std::size_t p = b.outcomes.size();
  const auto old_rows = work.cpts.at(to).rows;

  work.parents[to].push_back(from);
  work.cpts[to].parent_order = work.parents[to];

  auto wanted = [&](std::size_t j) { return !base || j % arity != *base; };
  auto elicited = resolve_rows(work, to, work.parents[to], e, p, wanted);

  NodeProvenance prov{to, {}, p - 1, false};
  std::vector<std::vector<double>> rows(old_rows.size() * arity);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (wanted(j)) {
      auto& row = elicited.at(j);
      require_full_row(row, row_where(work, to, j));
      rows[j] = row;
      prov.rows.push_back({p - 1, 0});
    } else {
      rows[j] = old_rows[j / arity];
      prov.rows.push_back({0, p - 1});
    }
  }
  work.cpts[to].rows = std::move(rows);
  return prov;
}

inline Transaction reuse_successor_rows(const Network& net, const std::string& successor,
                                        const std::string& changed_parent,
                                        const Elicitation& rows_for_new, PendingKind kind) {
  require_valid(net);
  const auto& b = net.at(successor);
  net.at(changed_parent);
  const auto& ps = net.parents_of(successor);
  auto pos_it = std::find(ps.begin(), ps.end(), changed_parent);
  if (pos_it == ps.end())
    throw MaintenanceError(changed_parent + " is not a parent of " + successor);
  const std::size_t pos = static_cast<std::size_t>(pos_it - ps.begin());

  std::size_t old_count = net.at(changed_parent).outcomes.size();
  std::vector<std::optional<std::size_t>> source;
  if (const auto* pend = net.pending_for(successor)) {
    if (pend->changed_parent != changed_parent)
      throw MaintenanceError(successor + " is pending on " + pend->changed_parent +
                             ", not " + changed_parent);
    if (pend->kind != kind)
      throw MaintenanceError(std::string("pending change of ") + changed_parent + " is " +
                             (pend->kind == PendingKind::SplitOutcome ? "a split outcome"
                                                                      : "added outcomes"));
    old_count = pend->old_parent_outcomes;
    source = pend->source_outcome;
  } else {
    // No outcomes were added: every row carries over.
    require_no_pending(net);
    for (std::size_t i = 0; i < old_count; ++i) source.emplace_back(i);
  }

  const auto new_radices = parent_radices(net, successor);
  auto old_radices = new_radices;
  old_radices[pos] = old_count;
  const std::size_t p = b.outcomes.size();
  const auto& old_rows = net.cpts.at(successor).rows;

  auto wanted = [&](std::size_t j) {
    return !source[config_at(j, new_radices).assignment[pos]].has_value();
  };
  auto elicited = resolve_rows(net, successor, ps, rows_for_new, p, wanted);

  Network after = net;
  NodeProvenance prov{successor, {}, p - 1, false};
  std::vector<std::vector<double>> rows;
  const std::size_t n = config_count(new_radices);
  for (std::size_t j = 0; j < n; ++j) {
    auto cfg = config_at(j, new_radices);
    if (auto src = source[cfg.assignment[pos]]) {
      cfg.assignment[pos] = *src;
      rows.push_back(old_rows[config_index(cfg, old_radices)]);
      prov.rows.push_back({0, p - 1});
    } else {
      auto& row = elicited.at(j);
      require_full_row(row, row_where(net, successor, j));
      rows.push_back(row);
      prov.rows.push_back({p - 1, 0});
    }
  }
  after.cpts[successor].rows = std::move(rows);
  std::erase_if(after.pending,
                [&](const PendingReassessment& r) { return r.successor == successor; });

  Mode mode = kind == PendingKind::SplitOutcome ? Mode::SplitOutcome : Mode::IgnoredOutcome;
  SuccessorPlan plan{successor, true, rows_for_new};
  EditOp op{mode, kind == PendingKind::SplitOutcome
                      ? EditChange{SplitOutcome{changed_parent, {}, {}, SplitInput::Weights,
                                                {}, {plan}}}
                      : EditChange{AddOutcomes{changed_parent, {}, {}, {plan}}}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::nullopt);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ignored outcome

// Appends `new_outcomes` to `node`. For each parent configuration j the
// elicited masses of the new outcomes fix lambda_j = 1 - sum(new), and the old
// entries become lambda_j times their old values.
inline Transaction add_outcomes_ignored(const Network& net, const std::string& node,
                                        const std::vector<std::string>& new_outcomes,
                                        const Elicitation& new_probs) {
  using namespace detail;
  require_valid(net);
  require_no_pending(net);
  const auto& var = net.at(node);
  require_labels(new_outcomes, var.outcomes, node);

  const std::size_t m = var.outcomes.size();
  const std::size_t k = new_outcomes.size();
  const auto& ps = net.parents_of(node);
  const auto& old_rows = net.cpts.at(node).rows;

  std::map<std::size_t, std::vector<double>> added;
  if (k > 0 || !new_probs.empty())
    added = resolve_rows(net, node, ps, new_probs, k, [](std::size_t) { return true; });

  Network after = net;
  RescaleFactors factors;
  NodeProvenance prov{node, {}, m + k - 1, false};
  auto& rows = after.cpts[node].rows;
  for (std::size_t j = 0; j < old_rows.size(); ++j) {
    std::vector<double> extra = k > 0 ? added.at(j) : std::vector<double>{};
    const auto where = row_where(net, node, j);
    require_entries(extra, where);
    double mass = 0.0;
    for (double x : extra) mass += x;
    if (mass > 1.0 + kRowTolerance)
      throw MaintenanceError("new-outcome mass " + fmt_number(mass) + " exceeds 1 for " + where);
    const double lambda = std::max(0.0, 1.0 - mass);
    auto& row = rows[j];
    for (double& x : row) x *= lambda;
    row.insert(row.end(), extra.begin(), extra.end());
    factors.ignored.push_back(lambda);
    prov.rows.push_back({k, m - 1});
  }
  auto* changed = after.find(node);
  changed->outcomes.insert(changed->outcomes.end(), new_outcomes.begin(), new_outcomes.end());

  if (k > 0) {
    std::vector<std::optional<std::size_t>> source;
    for (std::size_t i = 0; i < m + k; ++i)
      source.push_back(i < m ? std::optional<std::size_t>(i) : std::nullopt);
    mark_successors_pending(after, node, PendingKind::AddedOutcomes, m, source);
  }

  EditOp op{Mode::IgnoredOutcome, AddOutcomes{node, new_outcomes, new_probs, {}}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::move(factors));
}

// Re-encodes a successor of a node that gained outcomes: rows conditioned on
// the old outcomes are copied verbatim; rows for the new outcomes (times every
// configuration of the other parents) come from `rows_for_new_outcomes`.
inline Transaction reuse_successor_rows_ignored(const Network& net,
                                                const std::string& successor,
                                                const std::string& changed_parent,
                                                const Elicitation& rows_for_new_outcomes) {
  return detail::reuse_successor_rows(net, successor, changed_parent, rows_for_new_outcomes,
                                      PendingKind::AddedOutcomes);
}

// General reassessment counterpart: full rows over the enlarged outcome space.
inline Transaction add_outcomes(const Network& net, const std::string& node,
                                const std::vector<std::string>& new_outcomes,
                                const Elicitation& rows) {
  using namespace detail;
  require_valid(net);
  require_no_pending(net);
  const auto& var = net.at(node);
  require_labels(new_outcomes, var.outcomes, node);
  const std::size_t m = var.outcomes.size();

  Network after = net;
  auto* changed = after.find(node);
  changed->outcomes.insert(changed->outcomes.end(), new_outcomes.begin(), new_outcomes.end());
  after.cpts[node].rows = full_table(after, node, rows);

  std::vector<std::optional<std::size_t>> source;
  for (std::size_t i = 0; i < changed->outcomes.size(); ++i)
    source.push_back(i < m ? std::optional<std::size_t>(i) : std::nullopt);
  if (!new_outcomes.empty())
    mark_successors_pending(after, node, PendingKind::AddedOutcomes, m, source);

  auto prov = elicited_table(node, after.cpts[node].rows.size(), changed->outcomes.size());
  EditOp op{Mode::General, AddOutcomes{node, new_outcomes, rows, {}}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::nullopt);
}

// ---------------------------------------------------------------------------
// Split outcome

// Replaces outcome `split_label` of `node` by `parts`, in place. Per parent
// configuration the input is either weights summing to one or part
// probabilities summing to the old mass of the split outcome; the latter are
// converted to weights. Every other entry is copied unchanged.
inline Transaction split_outcome(const Network& net, const std::string& node,
                                 const std::string& split_label,
                                 const std::vector<std::string>& parts, SplitInput input,
                                 const Elicitation& weights_or_probs) {
  using namespace detail;
  require_valid(net);
  require_no_pending(net);
  const auto& var = net.at(node);
  auto s_opt = var.outcome_index(split_label);
  if (!s_opt) throw MaintenanceError("unknown outcome " + split_label + " of node " + node);
  const std::size_t s = *s_opt;
  if (parts.empty()) throw MaintenanceError("split of " + split_label + " needs at least one part");
  auto others = var.outcomes;
  others.erase(others.begin() + static_cast<std::ptrdiff_t>(s));
  require_labels(parts, others, node);

  const std::size_t m = var.outcomes.size();
  const std::size_t k = parts.size();
  const auto& old_rows = net.cpts.at(node).rows;
  auto given = resolve_rows(net, node, net.parents_of(node), weights_or_probs, k,
                            [](std::size_t) { return true; });

  Network after = net;
  RescaleFactors factors;
  NodeProvenance prov{node, {}, m + k - 2, false};
  for (std::size_t j = 0; j < old_rows.size(); ++j) {
    const auto& old = old_rows[j];
    const double mass = old[s];
    const auto& vals = given.at(j);
    const auto where = row_where(net, node, j);
    require_entries(vals, where);
    double sum = 0.0;
    for (double x : vals) sum += x;

    std::vector<double> weights(k);
    if (input == SplitInput::Weights) {
      if (std::abs(sum - 1.0) > kRowTolerance)
        throw MaintenanceError("split weights for " + where + " sum to " + fmt_number(sum));
      weights = vals;
    } else {
      if (std::abs(sum - mass) > kRowTolerance)
        throw MaintenanceError("part probabilities for " + where + " sum to " +
                               fmt_number(sum) + " but " + split_label + " had " +
                               fmt_number(mass));
      if (mass == 0.0 && sum != 0.0)
        throw MaintenanceError("parts of " + split_label + " must be zero for " + where);
      for (std::size_t i = 0; i < k; ++i)
        weights[i] = sum > 0.0 ? vals[i] / sum : 1.0 / static_cast<double>(k);
    }

    std::vector<double> row(old.begin(), old.begin() + static_cast<std::ptrdiff_t>(s));
    for (double w : weights) row.push_back(w * mass);
    row.insert(row.end(), old.begin() + static_cast<std::ptrdiff_t>(s) + 1, old.end());
    after.cpts[node].rows[j] = std::move(row);
    factors.split.push_back(std::move(weights));
    prov.rows.push_back({k - 1, m - 1});
  }

  auto* changed = after.find(node);
  changed->outcomes.erase(changed->outcomes.begin() + static_cast<std::ptrdiff_t>(s));
  changed->outcomes.insert(changed->outcomes.begin() + static_cast<std::ptrdiff_t>(s),
                           parts.begin(), parts.end());

  std::vector<std::optional<std::size_t>> source;
  for (std::size_t i = 0; i < m + k - 1; ++i) {
    if (i < s) source.emplace_back(i);
    else if (i < s + k) source.push_back(k == 1 ? std::optional<std::size_t>(s) : std::nullopt);
    else source.emplace_back(i - k + 1);
  }
  mark_successors_pending(after, node, PendingKind::SplitOutcome, m, source);

  EditOp op{Mode::SplitOutcome,
            SplitOutcome{node, split_label, parts, input, weights_or_probs, {}}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::move(factors));
}

inline Transaction reuse_successor_rows_split(const Network& net, const std::string& successor,
                                              const std::string& changed_parent,
                                              const Elicitation& rows_for_parts) {
  return detail::reuse_successor_rows(net, successor, changed_parent, rows_for_parts,
                                      PendingKind::SplitOutcome);
}

// General reassessment of a split: full rows over the new outcome space.
inline Transaction split_outcome_general(const Network& net, const std::string& node,
                                         const std::string& split_label,
                                         const std::vector<std::string>& parts,
                                         const Elicitation& rows) {
  using namespace detail;
  require_valid(net);
  require_no_pending(net);
  const auto& var = net.at(node);
  auto s_opt = var.outcome_index(split_label);
  if (!s_opt) throw MaintenanceError("unknown outcome " + split_label + " of node " + node);
  const std::size_t s = *s_opt;
  if (parts.empty()) throw MaintenanceError("split of " + split_label + " needs at least one part");
  auto others = var.outcomes;
  others.erase(others.begin() + static_cast<std::ptrdiff_t>(s));
  require_labels(parts, others, node);
  const std::size_t m = var.outcomes.size();
  const std::size_t k = parts.size();

  Network after = net;
  auto* changed = after.find(node);
  changed->outcomes.erase(changed->outcomes.begin() + static_cast<std::ptrdiff_t>(s));
  changed->outcomes.insert(changed->outcomes.begin() + static_cast<std::ptrdiff_t>(s),
                           parts.begin(), parts.end());
  after.cpts[node].rows = full_table(after, node, rows);

  std::vector<std::optional<std::size_t>> source;
  for (std::size_t i = 0; i < m + k - 1; ++i) {
    if (i < s) source.emplace_back(i);
    else if (i < s + k) source.push_back(k == 1 ? std::optional<std::size_t>(s) : std::nullopt);
    else source.emplace_back(i - k + 1);
  }
  mark_successors_pending(after, node, PendingKind::SplitOutcome, m, source);

  auto prov = elicited_table(node, after.cpts[node].rows.size(), changed->outcomes.size());
  EditOp op{Mode::General, SplitOutcome{node, split_label, parts, SplitInput::Weights, rows, {}}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::nullopt);
}

// ---------------------------------------------------------------------------
// Assumed constant outcome

// Adds arc from -> to. The old table of `to` becomes its block for
// from = baseline; only rows for the other outcomes of `from` are elicited.
inline Transaction add_arc_assumed_constant(const Network& net, const std::string& from,
                                            const std::string& to, const std::string& baseline,
                                            const Elicitation& rows_for_other_outcomes) {
  using namespace detail;
  require_valid(net);
  require_no_pending(net);
  Network after = net;
  auto prov = add_arc_in_place(after, from, to, baseline, rows_for_other_outcomes);
  EditOp op{Mode::AssumedConstant, AddArc{from, to, baseline, rows_for_other_outcomes}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::nullopt);
}

inline Transaction add_arc(const Network& net, const std::string& from, const std::string& to,
                           const Elicitation& rows) {
  using namespace detail;
  require_valid(net);
  require_no_pending(net);
  Network after = net;
  auto prov = add_arc_in_place(after, from, to, std::nullopt, rows);
  EditOp op{Mode::General, AddArc{from, to, std::nullopt, rows}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::nullopt);
}

// Adds `var` (appended to the declaration order) with the given parents and a
// fully elicited table, then makes it the last parent of each listed
// successor. In AssumedConstant mode successors keep their old table as the
// block for the baseline outcome; in General mode they are fully re-elicited.
inline Transaction add_variable(const Network& net, const Variable& var,
                                const std::vector<std::string>& parents, Mode mode,
                                const Elicitation& elicited,
                                const std::optional<std::string>& baseline,
                                const std::vector<SuccessorPlan>& successors) {
  using namespace detail;
  if (!mode_is_legal(EditKind::AddVariable, mode))
    throw MaintenanceError(std::string("mode ") + to_string(mode) +
                           " does not apply to add_variable");
  require_valid(net);
  require_no_pending(net);
  if (var.id.empty()) throw MaintenanceError("new variable needs an id");
  if (net.find(var.id)) throw MaintenanceError("variable " + var.id + " already exists");
  if (var.outcomes.empty()) throw MaintenanceError("variable " + var.id + " needs outcomes");
  require_labels(var.outcomes, {}, var.id);
  for (std::size_t i = 0; i < parents.size(); ++i) {
    net.at(parents[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (parents[i] == parents[j]) throw MaintenanceError("parent " + parents[i] + " given twice");
  }
  std::optional<std::string> base;
  if (mode == Mode::AssumedConstant) {
    if (!baseline) throw MaintenanceError("assumed-constant mode needs a baseline outcome");
    if (!var.outcome_index(*baseline))
      throw MaintenanceError("baseline " + *baseline + " is not an outcome of " + var.id);
    base = baseline;
  } else if (baseline) {
    throw MaintenanceError("a baseline outcome only applies in assumed-constant mode");
  }

  Network after = net;
  after.variables.push_back(var);
  after.parents[var.id] = parents;
  after.cpts[var.id] = Cpt{var.id, parents, {}};
  after.cpts[var.id].rows = full_table(after, var.id, elicited);

  std::vector<NodeProvenance> prov{
      elicited_table(var.id, after.cpts[var.id].rows.size(), var.outcomes.size())};
  std::set<std::string> done;
  for (const auto& plan : successors) {
    if (!done.insert(plan.successor).second)
      throw MaintenanceError("successor " + plan.successor + " listed twice");
    if (plan.successor == var.id) throw MaintenanceError("variable cannot succeed itself");
    net.at(plan.successor);
    if (!plan.reuse && base)
      throw MaintenanceError("successor " + plan.successor +
                             " opts out of reuse; use general mode for this variable");
    prov.push_back(add_arc_in_place(after, var.id, plan.successor, base, plan.rows));
  }

  EditOp op{mode, AddVariable{var, parents, elicited, baseline, successors}};
  return finish(net, std::move(op), std::move(after), std::move(prov), std::nullopt);
}

// ---------------------------------------------------------------------------
// General edits: no special case applies; affected tables are replaced.

inline Transaction replace_cpt(const Network& net, const std::string& node,
                               const Elicitation& rows) {
  using namespace detail;
  require_valid(net);
  net.at(node);
  if (!net.pending.empty() && !net.pending_for(node)) require_no_pending(net);
  Network after = net;
  after.cpts[node].rows = full_table(after, node, rows);
  std::erase_if(after.pending,
                [&](const PendingReassessment& r) { return r.successor == node; });
  auto prov = elicited_table(node, after.cpts[node].rows.size(), net.at(node).outcomes.size());
  EditOp op{Mode::General, ReplaceCpt{node, rows}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::nullopt);
}

inline Transaction remove_arc(const Network& net, const std::string& from, const std::string& to,
                              const Elicitation& rows) {
  using namespace detail;
  require_valid(net);
  require_no_pending(net);
  net.at(from);
  const auto& ps = net.parents_of(to);
  if (std::find(ps.begin(), ps.end(), from) == ps.end())
    throw MaintenanceError("arc " + from + "->" + to + " does not exist");
  Network after = net;
  std::erase(after.parents[to], from);
  after.cpts[to].parent_order = after.parents[to];
  after.cpts[to].rows = full_table(after, to, rows);
  auto prov = elicited_table(to, after.cpts[to].rows.size(), net.at(to).outcomes.size());
  EditOp op{Mode::General, RemoveArc{from, to, rows}};
  return finish(net, std::move(op), std::move(after), {std::move(prov)}, std::nullopt);
}

inline Transaction remove_outcome(const Network& net, const std::string& node,
                                  const std::string& label,
                                  const std::map<std::string, Elicitation>& replacements,
                                  bool renormalize) {
  using namespace detail;
  require_valid(net);
  require_no_pending(net);
  const auto& var = net.at(node);
  auto r_opt = var.outcome_index(label);
  if (!r_opt) throw MaintenanceError("unknown outcome " + label + " of node " + node);
  const std::size_t r = *r_opt;
  if (var.outcomes.size() == 1)
    throw MaintenanceError("cannot remove the only outcome of " + node);

  std::vector<std::string> affected{node};
  for (auto& c : net.children_of(node)) affected.push_back(c);
  for (const auto& [id, rows] : replacements)
    if (std::find(affected.begin(), affected.end(), id) == affected.end())
      throw MaintenanceError("replacement given for unaffected node " + id);
  if (!renormalize) {
    std::string missing;
    for (const auto& id : affected)
      if (!replacements.count(id)) missing += (missing.empty() ? "" : ", ") + id;
    if (!missing.empty())
      throw MaintenanceError("removing " + label + " from " + node +
                             " leaves stale tables without replacements: " + missing);
  }

  Network after = net;
  auto* changed = after.find(node);
  changed->outcomes.erase(changed->outcomes.begin() + static_cast<std::ptrdiff_t>(r));
  std::vector<NodeProvenance> prov;

  if (auto it = replacements.find(node); it != replacements.end()) {
    after.cpts[node].rows = full_table(after, node, it->second);
    prov.push_back(elicited_table(node, after.cpts[node].rows.size(), changed->outcomes.size()));
  } else {
    NodeProvenance np{node, {}, changed->outcomes.size() - 1, true};
    for (std::size_t j = 0; j < after.cpts[node].rows.size(); ++j) {
      auto& row = after.cpts[node].rows[j];
      const double rest = 1.0 - row[r];
      if (rest <= kRowTolerance)
        throw MaintenanceError("cannot renormalize " + row_where(net, node, j) + ": " + label +
                               " carries all of its mass");
      row.erase(row.begin() + static_cast<std::ptrdiff_t>(r));
      for (double& x : row) x /= rest;
      np.rows.push_back({0, np.free_per_row});
    }
    prov.push_back(std::move(np));
  }

  for (std::size_t c = 1; c < affected.size(); ++c) {
    const auto& child = affected[c];
    const std::size_t p = net.at(child).outcomes.size();
    if (auto it = replacements.find(child); it != replacements.end()) {
      after.cpts[child].rows = full_table(after, child, it->second);
      prov.push_back(elicited_table(child, after.cpts[child].rows.size(), p));
      continue;
    }
    const auto& ps = net.parents_of(child);
    const std::size_t pos =
        static_cast<std::size_t>(std::find(ps.begin(), ps.end(), node) - ps.begin());
    const auto old_radices = parent_radices(net, child);
    const auto new_radices = parent_radices(after, child);
    const auto& old_rows = net.cpts.at(child).rows;
    NodeProvenance np{child, {}, p - 1, true};
    std::vector<std::vector<double>> rows;
    for (const auto& cfg : enumerate_configs(new_radices)) {
      auto src = cfg;
      if (src.assignment[pos] >= r) ++src.assignment[pos];
      rows.push_back(old_rows[config_index(src, old_radices)]);
      np.rows.push_back({0, p - 1});
    }
    after.cpts[child].rows = std::move(rows);
    prov.push_back(std::move(np));
  }

  EditOp op{Mode::General, RemoveOutcome{node, label, replacements, renormalize}};
  return finish(net, std::move(op), std::move(after), std::move(prov), std::nullopt);
}

// Dispatches the edits that have no special case.
inline Transaction general_edit(const Network& net, const EditOp& op) {
  if (op.mode != Mode::General)
    throw MaintenanceError(std::string(to_string(op.kind())) + " only supports general mode");
  if (const auto* e = std::get_if<RemoveArc>(&op.change))
    return remove_arc(net, e->from, e->to, e->elicited);
  if (const auto* e = std::get_if<RemoveOutcome>(&op.change))
    return remove_outcome(net, e->node, e->outcome, e->replacements, e->renormalize);
  if (const auto* e = std::get_if<ReplaceCpt>(&op.change))
    return replace_cpt(net, e->node, e->elicited);
  throw MaintenanceError(std::string(to_string(op.kind())) + " is not a general edit");
}

// ---------------------------------------------------------------------------
// Whole edits

namespace detail {

inline Transaction compose(const Network& before, const EditOp& op,
                           const std::vector<Transaction>& steps) {
  Network after = steps.back().after;
  after.version_label = advance_label(before.version_label);
  std::vector<NodeProvenance> prov;
  for (const auto& s : steps) prov.insert(prov.end(), s.provenance.begin(), s.provenance.end());
  Transaction t{before, op, std::move(after), std::move(prov), {}, steps.front().factors};
  t.report = audit_transaction(t);
  return t;
}

inline void resolve_successors(std::vector<Transaction>& steps, const std::string& node,
                               const std::vector<SuccessorPlan>& plans, PendingKind kind) {
  std::set<std::string> seen;
  for (const auto& plan : plans) {
    const Network& cur = steps.back().after;
    if (!seen.insert(plan.successor).second)
      throw MaintenanceError("successor " + plan.successor + " listed twice");
    const auto kids = cur.children_of(node);
    if (std::find(kids.begin(), kids.end(), plan.successor) == kids.end())
      throw MaintenanceError(plan.successor + " is not a successor of " + node);
    if (plan.reuse)
      steps.push_back(reuse_successor_rows(cur, plan.successor, node, plan.rows, kind));
    else
      steps.push_back(replace_cpt(cur, plan.successor, plan.rows));
  }
  const Network& last = steps.back().after;
  if (!last.pending.empty()) {
    std::string s;
    for (const auto& p : last.pending) s += (s.empty() ? "" : ", ") + p.successor;
    throw MaintenanceError("successors of " + node + " left without a plan: " + s);
  }
}

}  // namespace detail

// Applies one complete edit, including the re-encoding of every successor
// affected by an outcome-space change. The result never has pending nodes.
inline Transaction apply_edit(const Network& net, const EditOp& op) {
  using namespace detail;
  if (!mode_is_legal(op.kind(), op.mode))
    throw MaintenanceError(std::string("mode ") + to_string(op.mode) + " does not apply to " +
                           to_string(op.kind()));
  std::vector<Transaction> steps;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, AddOutcomes>) {
          steps.push_back(op.mode == Mode::IgnoredOutcome
                              ? add_outcomes_ignored(net, e.node, e.outcomes, e.elicited)
                              : add_outcomes(net, e.node, e.outcomes, e.elicited));
          resolve_successors(steps, e.node, e.successors, PendingKind::AddedOutcomes);
        } else if constexpr (std::is_same_v<T, SplitOutcome>) {
          steps.push_back(op.mode == Mode::SplitOutcome
                              ? split_outcome(net, e.node, e.outcome, e.parts, e.input,
                                              e.elicited)
                              : split_outcome_general(net, e.node, e.outcome, e.parts,
                                                      e.elicited));
          resolve_successors(steps, e.node, e.successors, PendingKind::SplitOutcome);
        } else if constexpr (std::is_same_v<T, AddVariable>) {
          steps.push_back(add_variable(net, e.variable, e.parents, op.mode, e.elicited,
                                       e.baseline, e.successors));
        } else if constexpr (std::is_same_v<T, AddArc>) {
          if (op.mode == Mode::AssumedConstant) {
            if (!e.baseline) throw MaintenanceError("assumed-constant mode needs a baseline");
            steps.push_back(add_arc_assumed_constant(net, e.from, e.to, *e.baseline, e.elicited));
          } else {
            if (e.baseline)
              throw MaintenanceError("a baseline outcome only applies in assumed-constant mode");
            steps.push_back(add_arc(net, e.from, e.to, e.elicited));
          }
        } else {
          steps.push_back(general_edit(net, op));
        }
      },
      op.change);
  return compose(net, op, steps);
}

}  // namespace kbm
