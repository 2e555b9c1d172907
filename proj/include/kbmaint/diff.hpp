#pragma once

// Structural and numeric comparison of two networks. CPT cells are matched
// by (parent outcome labels, outcome label), so a table whose shape changed
// still shows which surviving cells moved.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kbmaint/io.hpp"
#include "kbmaint/network.hpp"

namespace kbm {

struct CellChange {
  std::string node;
  std::string config;  // "{P=p1, Q=q2}"
  std::string outcome;
  double old_value = 0.0;
  double new_value = 0.0;
};

struct NetworkDiff {
  std::vector<std::string> label;      // "E -> E'1"
  std::vector<std::string> variables;  // "+ C", "- D"
  std::vector<std::string> outcomes;   // "A: + a3"
  std::vector<std::string> arcs;       // "+ A -> B"
  std::vector<CellChange> cells;

  bool identical() const {
    return label.empty() && variables.empty() && outcomes.empty() && arcs.empty() &&
           cells.empty();
  }
};

inline NetworkDiff diff_networks(const Network& a, const Network& b,
                                 double tolerance = kRowTolerance) {
  NetworkDiff d;
  if (a.version_label != b.version_label)
    d.label.push_back(a.version_label + " -> " + b.version_label);

  for (const auto& v : b.variables)
    if (!a.find(v.id)) d.variables.push_back("+ " + v.id);
  for (const auto& v : a.variables)
    if (!b.find(v.id)) d.variables.push_back("- " + v.id);

  for (const auto& va : a.variables) {
    const auto* vb = b.find(va.id);
    if (!vb) continue;
    for (const auto& o : vb->outcomes)
      if (!va.outcome_index(o)) d.outcomes.push_back(va.id + ": + " + o);
    for (const auto& o : va.outcomes)
      if (!vb->outcome_index(o)) d.outcomes.push_back(va.id + ": - " + o);
    // Same labels in a different order still count as a change.
    std::vector<std::string> common_a, common_b;
    for (const auto& o : va.outcomes)
      if (vb->outcome_index(o)) common_a.push_back(o);
    for (const auto& o : vb->outcomes)
      if (va.outcome_index(o)) common_b.push_back(o);
    if (common_a != common_b) d.outcomes.push_back(va.id + ": reordered");
  }

  auto arcs_of = [](const Network& n) {
    std::vector<std::string> out;
    for (const auto& v : n.variables)
      for (const auto& p : n.parents_of(v.id)) out.push_back(p + " -> " + v.id);
    return out;
  };
  const auto arcs_a = arcs_of(a), arcs_b = arcs_of(b);
  for (const auto& arc : arcs_b)
    if (std::find(arcs_a.begin(), arcs_a.end(), arc) == arcs_a.end())
      d.arcs.push_back("+ " + arc);
  for (const auto& arc : arcs_a)
    if (std::find(arcs_b.begin(), arcs_b.end(), arc) == arcs_b.end())
      d.arcs.push_back("- " + arc);

  // Cells: key each row of `b` by its parent assignment labels and look up the
  // row of `a` with the same assignment under the same parent set.
  auto compare_tables = [&](const Variable& vb) {
    const auto* va = a.find(vb.id);
    if (!va) return;
    const auto& parents = b.parents_of(vb.id);
    if (a.parents_of(vb.id) != parents) return;
    auto ita = a.cpts.find(vb.id);
    auto itb = b.cpts.find(vb.id);
    if (ita == a.cpts.end() || itb == b.cpts.end()) return;

    std::vector<std::size_t> ra, rb;
    for (const auto& p : parents) {
      const auto* x = a.find(p);
      const auto* y = b.find(p);
      if (!x || !y) return;
      ra.push_back(x->outcomes.size());
      rb.push_back(y->outcomes.size());
    }
    for (const auto& cfg_b : enumerate_configs(rb)) {
      ParentConfig cfg_a;
      std::string where;
      for (std::size_t i = 0; i < parents.size(); ++i) {
        const auto& label = b.at(parents[i]).outcomes[cfg_b.assignment[i]];
        auto idx = a.at(parents[i]).outcome_index(label);
        if (!idx) break;
        cfg_a.assignment.push_back(*idx);
        where += (where.empty() ? "" : ", ") + parents[i] + "=" + label;
      }
      if (cfg_a.assignment.size() != parents.size()) continue;
      const auto ja = config_index(cfg_a, ra);
      const auto jb = config_index(cfg_b, rb);
      if (ja >= ita->second.rows.size() || jb >= itb->second.rows.size()) continue;
      const auto& row_a = ita->second.rows[ja];
      const auto& row_b = itb->second.rows[jb];
      for (std::size_t i = 0; i < vb.outcomes.size() && i < row_b.size(); ++i) {
        auto ia = va->outcome_index(vb.outcomes[i]);
        if (!ia || *ia >= row_a.size()) continue;
        if (std::abs(row_a[*ia] - row_b[i]) > tolerance)
          d.cells.push_back({vb.id, "{" + where + "}", vb.outcomes[i], row_a[*ia], row_b[i]});
      }
    }
  };
  for (const auto& vb : b.variables) compare_tables(vb);
  return d;
}

inline std::string format_diff(const NetworkDiff& d) {
  std::string out;
  auto section = [&](const char* name, const std::vector<std::string>& lines) {
    if (lines.empty()) return;
    out += std::string(name) + ":\n";
    for (const auto& l : lines) out += "  " + l + "\n";
  };
  section("version_label", d.label);
  section("variables", d.variables);
  section("outcomes", d.outcomes);
  section("arcs", d.arcs);
  if (!d.cells.empty()) {
    out += "cpts:\n";
    for (const auto& c : d.cells)
      out += "  " + c.node + " " + c.config + " " + c.outcome + ": " +
             format_double(c.old_value) + " -> " + format_double(c.new_value) + "\n";
  }
  return out;
}

}  // namespace kbm
