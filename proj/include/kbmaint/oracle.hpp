#pragma once

// Brute-force joint enumeration used as ground truth for the maintenance
// identities. Exact or nothing: there is no sampling fallback, and the
// enumeration refuses networks above a cell cap.
//
// This header deliberately does its own shape checking and indexing instead
// of calling into the maintenance path it is used to verify.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbmaint/network.hpp"

namespace kbm {

inline constexpr std::size_t kDefaultJointCap = 1'000'000;
inline constexpr double kOracleTolerance = 1e-8;

enum class OracleFailure { Malformed, CapExceeded, ZeroEvidence, Pending };

class OracleError : public std::runtime_error {
 public:
  OracleError(OracleFailure kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  OracleFailure kind() const { return kind_; }

 private:
  OracleFailure kind_;
};

// Cells in mixed-radix order over `variables`, last variable fastest.
struct JointTable {
  std::vector<std::string> variables;
  std::vector<std::vector<std::string>> outcomes;
  std::vector<std::size_t> radices;
  std::vector<double> cells;

  std::size_t position(const std::string& id) const {
    auto it = std::find(variables.begin(), variables.end(), id);
    if (it == variables.end()) throw OracleError(OracleFailure::Malformed, "no variable " + id);
    return static_cast<std::size_t>(it - variables.begin());
  }
};

struct IdentityCheck {
  bool holds = true;
  std::vector<std::string> diagnostics;

  explicit operator bool() const { return holds; }
};

namespace oracle_detail {

[[noreturn]] inline void malformed(const std::string& msg) {
  throw OracleError(OracleFailure::Malformed, msg);
}

// Well-formedness screen; throws on the first problem found.
inline void screen(const Network& net) {
  if (!net.pending.empty())
    throw OracleError(OracleFailure::Pending, "network has successors awaiting re-encoding");
  std::map<std::string, const Variable*> vars;
  for (const auto& v : net.variables) {
    if (v.id.empty() || !vars.emplace(v.id, &v).second) malformed("bad or repeated id " + v.id);
    if (v.outcomes.empty()) malformed(v.id + " has no outcomes");
    std::set<std::string> labels(v.outcomes.begin(), v.outcomes.end());
    if (labels.size() != v.outcomes.size()) malformed(v.id + " repeats an outcome label");
  }
  for (const auto& [id, ps] : net.parents) {
    if (!vars.count(id)) malformed("parents for unknown " + id);
    std::set<std::string> uniq(ps.begin(), ps.end());
    if (uniq.size() != ps.size()) malformed(id + " repeats a parent");
    for (const auto& p : ps)
      if (!vars.count(p)) malformed("unknown parent " + p);
  }
  for (const auto& [id, cpt] : net.cpts)
    if (!vars.count(id)) malformed("table for unknown " + id);

  // Kahn's algorithm: every node must eventually lose all its parents.
  std::map<std::string, std::size_t> waiting;
  for (const auto& v : net.variables) waiting[v.id] = net.parents_of(v.id).size();
  std::vector<std::string> ready;
  for (const auto& [id, n] : waiting)
    if (n == 0) ready.push_back(id);
  std::size_t placed = 0;
  while (!ready.empty()) {
    auto id = ready.back();
    ready.pop_back();
    ++placed;
    for (const auto& v : net.variables)
      for (const auto& p : net.parents_of(v.id))
        if (p == id && --waiting[v.id] == 0) ready.push_back(v.id);
  }
  if (placed != net.variables.size()) malformed("parent graph has a cycle");

  for (const auto& v : net.variables) {
    auto it = net.cpts.find(v.id);
    if (it == net.cpts.end()) malformed(v.id + " has no table");
    const auto& ps = net.parents_of(v.id);
    if (it->second.node != v.id || it->second.parent_order != ps)
      malformed(v.id + " table does not match its parents");
    std::size_t rows = 1;
    for (const auto& p : ps) {
      const std::size_t r = vars.at(p)->outcomes.size();
      if (rows > static_cast<std::size_t>(-1) / r) malformed(v.id + " table too large");
      rows *= r;
    }
    if (it->second.rows.size() != rows) malformed(v.id + " table has the wrong number of rows");
    for (const auto& row : it->second.rows) {
      if (row.size() != v.outcomes.size()) malformed(v.id + " row has the wrong width");
      double sum = 0.0;
      for (double x : row) {
        if (!(x >= 0.0 && x <= 1.0)) malformed(v.id + " entry outside [0, 1]");
        sum += x;
      }
      if (std::abs(sum - 1.0) > kRowTolerance) malformed(v.id + " row is not normalized");
    }
  }
}

}  // namespace oracle_detail

inline JointTable joint_distribution(const Network& net, std::size_t cap = kDefaultJointCap) {
  oracle_detail::screen(net);
  JointTable joint;
  std::size_t total = 1;
  for (const auto& v : net.variables) {
    joint.variables.push_back(v.id);
    joint.outcomes.push_back(v.outcomes);
    joint.radices.push_back(v.outcomes.size());
    if (total > cap / v.outcomes.size())
      throw OracleError(OracleFailure::CapExceeded,
                        "joint table exceeds the cap of " + std::to_string(cap) + " cells");
    total *= v.outcomes.size();
  }

  struct Factor {
    const std::vector<std::vector<double>>* rows;
    std::vector<std::size_t> parent_pos;
    std::vector<std::size_t> parent_radix;
  };
  std::vector<Factor> factors;
  for (const auto& v : net.variables) {
    Factor f{&net.cpts.at(v.id).rows, {}, {}};
    for (const auto& p : net.parents_of(v.id)) {
      f.parent_pos.push_back(joint.position(p));
      f.parent_radix.push_back(net.at(p).outcomes.size());
    }
    factors.push_back(std::move(f));
  }

  joint.cells.resize(total);
  std::vector<std::size_t> digits(joint.variables.size(), 0);
  for (std::size_t cell = 0; cell < total; ++cell) {
    double prob = 1.0;
    for (std::size_t v = 0; v < factors.size(); ++v) {
      std::size_t row = 0;
      for (std::size_t i = 0; i < factors[v].parent_pos.size(); ++i)
        row = row * factors[v].parent_radix[i] + digits[factors[v].parent_pos[i]];
      prob *= (*factors[v].rows)[row][digits[v]];
    }
    joint.cells[cell] = prob;
    for (std::size_t i = digits.size(); i-- > 0;) {
      if (++digits[i] < joint.radices[i]) break;
      digits[i] = 0;
    }
  }
  return joint;
}

// Unnormalized sums of joint cells, grouped by the assignment of `vars`
// (mixed radix in the given order, last fastest), restricted to cells that
// agree with `evidence` (variable id -> outcome index).
inline std::vector<double> marginal(const JointTable& joint, const std::vector<std::string>& vars,
                                    const std::map<std::string, std::size_t>& evidence = {}) {
  std::vector<std::size_t> pos;
  std::size_t size = 1;
  for (const auto& v : vars) {
    pos.push_back(joint.position(v));
    size *= joint.radices[pos.back()];
  }
  std::vector<std::pair<std::size_t, std::size_t>> ev;
  for (const auto& [id, idx] : evidence) {
    const auto p = joint.position(id);
    if (idx >= joint.radices[p]) throw OracleError(OracleFailure::Malformed, "evidence out of range");
    ev.emplace_back(p, idx);
  }

  std::vector<double> out(size, 0.0);
  std::vector<std::size_t> digits(joint.variables.size(), 0);
  for (std::size_t cell = 0; cell < joint.cells.size(); ++cell) {
    bool agree = true;
    for (const auto& [p, idx] : ev) agree = agree && digits[p] == idx;
    if (agree) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < pos.size(); ++i) k = k * joint.radices[pos[i]] + digits[pos[i]];
      out[k] += joint.cells[cell];
    }
    for (std::size_t i = digits.size(); i-- > 0;) {
      if (++digits[i] < joint.radices[i]) break;
      digits[i] = 0;
    }
  }
  return out;
}

// P(query | evidence), normalized over query assignments.
inline std::vector<double> conditional(const JointTable& joint,
                                       const std::vector<std::string>& query_vars,
                                       const std::map<std::string, std::size_t>& evidence) {
  auto out = marginal(joint, query_vars, evidence);
  double mass = 0.0;
  for (double x : out) mass += x;
  if (!(mass > 0.0)) throw OracleError(OracleFailure::ZeroEvidence, "evidence has probability 0");
  for (double& x : out) x /= mass;
  return out;
}

// `node` plus all of its ancestors (optionally without `node` itself), in
// declaration order. Marginals over an ancestral set are exact.
inline Network ancestral_subnetwork(const Network& net, const std::string& node,
                                    bool include_node = true) {
  std::set<std::string> keep;
  std::vector<std::string> todo{node};
  while (!todo.empty()) {
    auto id = todo.back();
    todo.pop_back();
    if (!keep.insert(id).second) continue;
    for (const auto& p : net.parents_of(id)) todo.push_back(p);
  }
  if (!include_node) keep.erase(node);
  Network sub;
  sub.version_label = net.version_label;
  for (const auto& v : net.variables) {
    if (!keep.count(v.id)) continue;
    sub.variables.push_back(v);
    sub.parents[v.id] = net.parents_of(v.id);
    if (auto it = net.cpts.find(v.id); it != net.cpts.end()) sub.cpts[v.id] = it->second;
  }
  for (const auto& p : net.pending)
    if (keep.count(p.successor)) sub.pending.push_back(p);
  return sub;
}

namespace oracle_detail {

inline std::vector<std::size_t> radices_of(const Network& net, const std::vector<std::string>& ids) {
  std::vector<std::size_t> r;
  for (const auto& id : ids) r.push_back(net.at(id).outcomes.size());
  return r;
}

inline std::size_t product(const std::vector<std::size_t>& r) {
  std::size_t n = 1;
  for (auto x : r) n *= x;
  return n;
}

// A malformed network cannot satisfy an identity; report it as a failure.
template <typename Body>
IdentityCheck guarded(Body&& body) {
  try {
    return body();
  } catch (const OracleError& e) {
    if (e.kind() != OracleFailure::Malformed) throw;
    return {false, {std::string("malformed network: ") + e.what()}};
  }
}

// Checks that, in `after`, the distribution of `node` given each parent
// configuration and given that none of `new_outcomes` occurred equals the
// corresponding row of `before`. The conditionals are recovered from the
// joints of the ancestral sets with and without `node`, so the rescaled table
// is never read directly. Configurations whose complement mass is zero are
// skipped.
inline IdentityCheck ignored_identity(const Network& before, const Network& after,
                                      const std::string& node,
                                      const std::vector<std::string>& new_outcomes,
                                      double tol) {
  IdentityCheck result;
  auto fail = [&](std::string msg) {
    result.holds = false;
    result.diagnostics.push_back(std::move(msg));
  };
  const auto& var_before = before.at(node);
  const auto& var_after = after.at(node);
  const auto& parents = after.parents_of(node);
  if (parents != before.parents_of(node)) {
    fail("parents of " + node + " differ between versions");
    return result;
  }
  const auto radices = radices_of(after, parents);
  if (radices != radices_of(before, parents)) {
    fail("parent outcome spaces of " + node + " differ between versions");
    return result;
  }

  const auto with_node = joint_distribution(ancestral_subnetwork(after, node, true));
  const auto without_node = joint_distribution(ancestral_subnetwork(after, node, false));
  auto vars = parents;
  vars.push_back(node);
  const auto p_joint = marginal(with_node, vars);
  const auto p_parents = marginal(without_node, parents);

  std::vector<bool> is_new(var_after.outcomes.size(), false);
  for (const auto& label : new_outcomes) {
    auto idx = var_after.outcome_index(label);
    if (!idx) {
      fail("new outcome " + label + " not found on " + node);
      return result;
    }
    is_new[*idx] = true;
  }

  const std::size_t width = var_after.outcomes.size();
  const auto& old_rows = before.cpts.at(node).rows;
  for (std::size_t c = 0; c < product(radices); ++c) {
    const double pc = p_parents[c];
    if (!(pc > 0.0)) {
      result.diagnostics.push_back("configuration " + std::to_string(c) +
                                   " has probability 0; skipped");
      continue;
    }
    std::vector<double> cond(width);
    double total = 0.0, added = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
      cond[i] = p_joint[c * width + i] / pc;
      total += cond[i];
      if (is_new[i]) added += cond[i];
    }
    if (std::abs(total - 1.0) > tol) {
      fail("configuration " + std::to_string(c) + ": conditional mass " +
           detail::fmt_number(total));
      continue;
    }
    const double complement = 1.0 - added;
    if (complement <= tol) {
      result.diagnostics.push_back("configuration " + std::to_string(c) +
                                   " has no mass outside the new outcomes; skipped");
      continue;
    }
    for (std::size_t i = 0; i < var_before.outcomes.size(); ++i) {
      auto idx = var_after.outcome_index(var_before.outcomes[i]);
      if (!idx || is_new[*idx]) {
        fail("old outcome " + var_before.outcomes[i] + " missing from " + node);
        continue;
      }
      const double got = cond[*idx] / complement;
      if (std::abs(got - old_rows[c][i]) > tol)
        fail("configuration " + std::to_string(c) + ", outcome " + var_before.outcomes[i] +
             ": " + detail::fmt_number(got) + " vs " + detail::fmt_number(old_rows[c][i]));
    }
  }
  return result;
}

// Checks that the joint of `after` conditioned on A = a_0 equals the joint of
// `before` (itself conditioned on A = a_0 when A was already present), cell by
// cell over every other variable.
inline IdentityCheck assumed_constant_identity(const Network& before, const Network& after,
                                               const std::string& a,
                                               const std::string& a0,
                                               double tol) {
  IdentityCheck result;
  auto fail = [&](std::string msg) {
    result.holds = false;
    result.diagnostics.push_back(std::move(msg));
  };
  const auto* var_a = after.find(a);
  if (!var_a) {
    fail(a + " is not in the new network");
    return result;
  }
  if (!after.parents_of(a).empty()) {
    fail(a + " is not a root");
    return result;
  }
  auto base = var_a->outcome_index(a0);
  if (!base) {
    fail(a0 + " is not an outcome of " + a);
    return result;
  }

  std::vector<std::string> rest;
  for (const auto& v : after.variables)
    if (v.id != a) rest.push_back(v.id);
  std::set<std::string> before_rest;
  for (const auto& v : before.variables)
    if (v.id != a) before_rest.insert(v.id);
  if (before_rest != std::set<std::string>(rest.begin(), rest.end())) {
    fail("variable sets differ apart from " + a);
    return result;
  }
  for (const auto& id : rest)
    if (before.at(id).outcomes != after.at(id).outcomes) {
      fail("outcomes of " + id + " differ");
      return result;
    }

  const auto joint_after = joint_distribution(after);
  const auto cond_after = conditional(joint_after, rest, {{a, *base}});
  const auto joint_before = joint_distribution(before);
  std::vector<double> ref;
  if (const auto* old_a = before.find(a)) {
    auto old_base = old_a->outcome_index(a0);
    if (!old_base) {
      fail(a0 + " is not an outcome of " + a + " in the old network");
      return result;
    }
    ref = conditional(joint_before, rest, {{a, *old_base}});
  } else {
    ref = marginal(joint_before, rest);
  }
  for (std::size_t i = 0; i < ref.size(); ++i)
    if (std::abs(cond_after[i] - ref[i]) > tol)
      fail("cell " + std::to_string(i) + ": " + detail::fmt_number(cond_after[i]) + " vs " +
           detail::fmt_number(ref[i]));
  return result;
}

// Checks that, per configuration of the node's parents, the joint mass of the
// parts under `after` equals that of the split outcome under `before`, and
// every other outcome keeps its mass.
inline IdentityCheck split_conservation(const Network& before, const Network& after,
                                        const std::string& node,
                                        const std::string& split_label,
                                        const std::vector<std::string>& parts,
                                        double tol) {
  IdentityCheck result;
  auto fail = [&](std::string msg) {
    result.holds = false;
    result.diagnostics.push_back(std::move(msg));
  };
  const auto& parents = before.parents_of(node);
  if (after.parents_of(node) != parents) {
    fail("parents of " + node + " differ between versions");
    return result;
  }
  auto pick = [&](const Network& n) {
    return n.pending.empty() ? joint_distribution(n)
                             : joint_distribution(ancestral_subnetwork(n, node, true));
  };
  auto vars = parents;
  vars.push_back(node);
  const auto pa = marginal(pick(after), vars);
  const auto pb = marginal(pick(before), vars);

  const auto& va = after.at(node);
  const auto& vb = before.at(node);
  const std::size_t configs = product(radices_of(before, parents));
  for (std::size_t c = 0; c < configs; ++c) {
    for (std::size_t i = 0; i < vb.outcomes.size(); ++i) {
      const double old_mass = pb[c * vb.outcomes.size() + i];
      double new_mass = 0.0;
      if (vb.outcomes[i] == split_label) {
        for (const auto& part : parts) {
          auto idx = va.outcome_index(part);
          if (!idx) {
            fail("part " + part + " missing from " + node);
            return result;
          }
          new_mass += pa[c * va.outcomes.size() + *idx];
        }
      } else {
        auto idx = va.outcome_index(vb.outcomes[i]);
        if (!idx) {
          fail("outcome " + vb.outcomes[i] + " missing from " + node);
          return result;
        }
        new_mass = pa[c * va.outcomes.size() + *idx];
      }
      if (std::abs(new_mass - old_mass) > tol)
        fail("configuration " + std::to_string(c) + ", outcome " + vb.outcomes[i] + ": " +
             detail::fmt_number(new_mass) + " vs " + detail::fmt_number(old_mass));
    }
  }
  return result;
}

}  // namespace oracle_detail

inline IdentityCheck check_ignored_identity(const Network& before, const Network& after,
                                            const std::string& node,
                                            const std::vector<std::string>& new_outcomes,
                                            double tol = kOracleTolerance) {
  return oracle_detail::guarded(
      [&] { return oracle_detail::ignored_identity(before, after, node, new_outcomes, tol); });
}

inline IdentityCheck check_assumed_constant_identity(const Network& before, const Network& after,
                                                     const std::string& a,
                                                     const std::string& a0,
                                                     double tol = kOracleTolerance) {
  return oracle_detail::guarded(
      [&] { return oracle_detail::assumed_constant_identity(before, after, a, a0, tol); });
}

inline IdentityCheck check_split_conservation(const Network& before, const Network& after,
                                              const std::string& node,
                                              const std::string& split_label,
                                              const std::vector<std::string>& parts,
                                              double tol = kOracleTolerance) {
  return oracle_detail::guarded(
      [&] { return oracle_detail::split_conservation(before, after, node, split_label, parts, tol); });
}

}  // namespace kbm
