#pragma once

// Elicitation cost model: closed-form assessment counts for the three special
// cases against general reassessment, the ratio curves derived from them, and
// an audit that counts the cells a concrete transaction actually elicited.
//
// Counts are free parameters: a row over q outcomes costs q-1. Conditioning
// sets are given as explicit radices; the product of the radices replaces the
// homogeneous n^c form.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbmaint/edit.hpp"

namespace kbm {

enum class CostCase { IgnoredOutcome, SplitOutcome, AssumedConstant };
enum class CostRole { ChangedNode, Successor };

struct CostQuery {
  CostCase which = CostCase::IgnoredOutcome;
  CostRole role = CostRole::ChangedNode;
  std::uint64_t m = 1;  // old outcome count of the changed node
  std::uint64_t k = 1;  // added outcomes, split parts, or outcomes of the new parent
  std::uint64_t p = 2;  // successor outcome count
  std::vector<std::uint64_t> radices;  // C(A), or the successor's other parents
};

struct CostResult {
  std::uint64_t general = 0;
  std::uint64_t special = 0;
  std::optional<double> ratio;

  bool operator==(const CostResult&) const = default;
};

inline const char* to_string(CostCase c) {
  switch (c) {
    case CostCase::IgnoredOutcome: return "ignored";
    case CostCase::SplitOutcome: return "split";
    case CostCase::AssumedConstant: return "assumed-constant";
  }
  return "?";
}

inline const char* to_string(CostRole r) {
  return r == CostRole::ChangedNode ? "changed" : "successor";
}

namespace detail {

inline std::uint64_t mul_checked(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    throw std::overflow_error("assessment count overflows 64 bits");
  return a * b;
}

inline std::uint64_t add_checked(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a)
    throw std::overflow_error("assessment count overflows 64 bits");
  return a + b;
}

}  // namespace detail

inline void validate_query(const CostQuery& q) {
  if (q.m < 1) throw std::invalid_argument("m must be at least 1");
  if (q.k < 1) throw std::invalid_argument("k must be at least 1");
  if (q.role == CostRole::Successor && q.p < 2)
    throw std::invalid_argument("successor outcome count p must be at least 2");
  for (auto r : q.radices)
    if (r < 1) throw std::invalid_argument("radices must be at least 1");
}

inline CostResult assessment_cost(const CostQuery& q) {
  using detail::add_checked;
  using detail::mul_checked;
  validate_query(q);

  std::uint64_t configs = 1;
  for (auto r : q.radices) configs = mul_checked(configs, r);

  const std::uint64_t m = q.m, k = q.k;
  const std::uint64_t per_row = q.role == CostRole::Successor ? q.p - 1 : 1;
  const std::uint64_t scale = mul_checked(per_row, configs);

  CostResult r;
  switch (q.which) {
    case CostCase::IgnoredOutcome:
      if (q.role == CostRole::ChangedNode) {
        r.general = mul_checked(add_checked(m, k) - 1, scale);
      } else {
        r.general = mul_checked(add_checked(m, k), scale);
      }
      r.special = mul_checked(k, scale);
      break;
    case CostCase::SplitOutcome:
      if (q.role == CostRole::ChangedNode) {
        r.general = mul_checked(add_checked(m, k) - 2, scale);
        r.special = mul_checked(k - 1, scale);
      } else {
        r.general = mul_checked(add_checked(m, k) - 1, scale);
        r.special = mul_checked(k, scale);
      }
      break;
    case CostCase::AssumedConstant:
      if (q.role == CostRole::ChangedNode) {
        // The new variable's own table gets no relief.
        r.general = r.special = mul_checked(k - 1, scale);
        r.ratio = 1.0;
        return r;
      }
      r.general = mul_checked(k, scale);
      r.special = mul_checked(k - 1, scale);
      break;
  }
  if (r.general > 0)
    r.ratio = static_cast<double>(r.special) / static_cast<double>(r.general);
  return r;
}

struct CurvePoint {
  std::uint64_t m = 0;
  std::uint64_t k = 0;
  std::optional<double> ratio;

  bool operator==(const CurvePoint&) const = default;
};

// Ratio of special to general assessments, from the closed forms. Undefined
// (nullopt) where the general count is zero.
inline std::optional<double> closed_form_ratio(CostCase c, CostRole role,
                                               std::uint64_t m, std::uint64_t k) {
  const double md = static_cast<double>(m), kd = static_cast<double>(k);
  switch (c) {
    case CostCase::IgnoredOutcome:
      return role == CostRole::ChangedNode ? kd / (md + kd - 1) : kd / (md + kd);
    case CostCase::SplitOutcome:
      if (role == CostRole::ChangedNode) {
        if (m + k == 2) return std::nullopt;
        return (kd - 1) / (md + kd - 2);
      }
      return kd / (md + kd - 1);
    case CostCase::AssumedConstant:
      if (role == CostRole::ChangedNode) return 1.0;
      return (kd - 1) / kd;
  }
  return std::nullopt;
}

inline std::vector<CurvePoint> ratio_curves(CostCase c, CostRole role,
                                            std::span<const std::uint64_t> m_values,
                                            std::span<const std::uint64_t> k_values) {
  if (m_values.empty() || k_values.empty())
    throw std::invalid_argument("ratio curves need at least one m and one k");
  std::vector<CurvePoint> out;
  out.reserve(m_values.size() * k_values.size());
  for (auto m : m_values) {
    for (auto k : k_values) {
      CostQuery q{c, role, m, k, 2, {}};
      validate_query(q);
      out.push_back({m, k, closed_form_ratio(c, role, m, k)});
    }
  }
  return out;
}

// Per-node counts from the transaction's row provenance. A node re-encoded
// more than once within one transaction is reported by its final encoding.
inline AssessmentReport audit_transaction(const Transaction& t) {
  AssessmentReport report;
  for (const auto& prov : t.provenance) {
    NodeAssessment a;
    a.node = prov.node;
    a.renormalized = prov.renormalized;
    for (const auto& row : prov.rows) {
      a.elicited += row.elicited;
      a.reused += row.reused;
      a.general_baseline += prov.free_per_row;
    }
    bool replaced = false;
    for (auto& existing : report.nodes) {
      if (existing.node == a.node) {
        existing = a;
        replaced = true;
      }
    }
    if (!replaced) report.nodes.push_back(a);
  }
  for (const auto& a : report.nodes)
    if (a.renormalized)
      report.notes.push_back("NON-PAPER: table of " + a.node +
                             " renormalized without elicitation");
  return report;
}

}  // namespace kbm
