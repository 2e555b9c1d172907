#pragma once

// Edit operations, transactions and the per-node assessment accounting
// attached to each transaction.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kbmaint/network.hpp"

namespace kbm {

// Parent id -> outcome label. Labels rather than indices so elicited blocks
// survive reordering of outcomes or parents.
using Assignment = std::map<std::string, std::string>;

struct ElicitedRow {
  Assignment given;
  std::vector<double> probs;

  bool operator==(const ElicitedRow&) const = default;
};

using Elicitation = std::vector<ElicitedRow>;

enum class Mode { General, IgnoredOutcome, SplitOutcome, AssumedConstant };

enum class EditKind {
  AddOutcomes,
  SplitOutcome,
  AddVariable,
  AddArc,
  RemoveArc,
  RemoveOutcome,
  ReplaceCpt
};

// How a successor of a node whose outcome space changed is re-encoded:
// reuse its old rows and elicit only the new blocks, or re-elicit everything.
struct SuccessorPlan {
  std::string successor;
  bool reuse = true;
  Elicitation rows;

  bool operator==(const SuccessorPlan&) const = default;
};

struct AddOutcomes {
  std::string node;
  std::vector<std::string> outcomes;
  // IgnoredOutcome: length-k vectors per configuration of the node's parents.
  // General: full rows.
  Elicitation elicited;
  std::vector<SuccessorPlan> successors;

  bool operator==(const AddOutcomes&) const = default;
};

enum class SplitInput { Weights, Probabilities };

struct SplitOutcome {
  std::string node;
  std::string outcome;
  std::vector<std::string> parts;
  SplitInput input = SplitInput::Weights;
  // SplitOutcome mode: length-k weights or part probabilities per
  // configuration. General: full rows.
  Elicitation elicited;
  std::vector<SuccessorPlan> successors;

  bool operator==(const SplitOutcome&) const = default;
};

struct AddVariable {
  Variable variable;
  std::vector<std::string> parents;
  Elicitation elicited;
  std::optional<std::string> baseline;
  // Existing nodes that gain the new variable as their last parent. Rows are
  // keyed over the successor's new parent list.
  std::vector<SuccessorPlan> successors;

  bool operator==(const AddVariable&) const = default;
};

struct AddArc {
  std::string from;
  std::string to;
  std::optional<std::string> baseline;
  Elicitation elicited;

  bool operator==(const AddArc&) const = default;
};

struct RemoveArc {
  std::string from;
  std::string to;
  Elicitation elicited;

  bool operator==(const RemoveArc&) const = default;
};

struct RemoveOutcome {
  std::string node;
  std::string outcome;
  // Replacement tables keyed by node id: the changed node and each direct
  // successor.
  std::map<std::string, Elicitation> replacements;
  // Non-paper convenience: drop the column and rescale rows; successors drop
  // the rows conditioned on the removed outcome.
  bool renormalize = false;

  bool operator==(const RemoveOutcome&) const = default;
};

struct ReplaceCpt {
  std::string node;
  Elicitation elicited;

  bool operator==(const ReplaceCpt&) const = default;
};

using EditChange = std::variant<AddOutcomes, SplitOutcome, AddVariable, AddArc,
                                RemoveArc, RemoveOutcome, ReplaceCpt>;

struct EditOp {
  Mode mode = Mode::General;
  EditChange change;

  EditKind kind() const { return static_cast<EditKind>(change.index()); }

  bool operator==(const EditOp&) const = default;
};

inline bool mode_is_legal(EditKind kind, Mode mode) {
  switch (mode) {
    case Mode::General:
      return true;
    case Mode::IgnoredOutcome:
      return kind == EditKind::AddOutcomes;
    case Mode::SplitOutcome:
      return kind == EditKind::SplitOutcome;
    case Mode::AssumedConstant:
      return kind == EditKind::AddArc || kind == EditKind::AddVariable;
  }
  return false;
}

inline const char* to_string(EditKind k) {
  switch (k) {
    case EditKind::AddOutcomes: return "add_outcomes";
    case EditKind::SplitOutcome: return "split_outcome";
    case EditKind::AddVariable: return "add_variable";
    case EditKind::AddArc: return "add_arc";
    case EditKind::RemoveArc: return "remove_arc";
    case EditKind::RemoveOutcome: return "remove_outcome";
    case EditKind::ReplaceCpt: return "replace_cpt";
  }
  return "?";
}

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::General: return "general";
    case Mode::IgnoredOutcome: return "ignored";
    case Mode::SplitOutcome: return "split";
    case Mode::AssumedConstant: return "assumed_constant";
  }
  return "?";
}

// Scaling factors applied by a special-case edit. `ignored[j]` is the
// complement mass of configuration j; `split[j][i]` is the share of the split
// outcome's mass given to part i under configuration j.
struct RescaleFactors {
  std::vector<double> ignored;
  std::vector<std::vector<double>> split;

  bool operator==(const RescaleFactors&) const = default;
};

// Where each row of a re-encoded table came from, counted in free
// parameters (a q-outcome row has q-1).
struct RowProvenance {
  std::size_t elicited = 0;
  std::size_t reused = 0;

  bool operator==(const RowProvenance&) const = default;
};

struct NodeProvenance {
  std::string node;
  std::vector<RowProvenance> rows;
  std::size_t free_per_row = 0;
  bool renormalized = false;

  bool operator==(const NodeProvenance&) const = default;
};

struct NodeAssessment {
  std::string node;
  std::size_t elicited = 0;
  std::size_t reused = 0;
  std::size_t general_baseline = 0;
  bool renormalized = false;

  bool operator==(const NodeAssessment&) const = default;
};

struct AssessmentReport {
  std::vector<NodeAssessment> nodes;
  std::vector<std::string> notes;

  const NodeAssessment* find(const std::string& node) const {
    for (const auto& n : nodes)
      if (n.node == node) return &n;
    return nullptr;
  }

  bool operator==(const AssessmentReport&) const = default;
};

struct Transaction {
  Network before;
  EditOp op;
  Network after;
  std::vector<NodeProvenance> provenance;
  AssessmentReport report;
  std::optional<RescaleFactors> factors;
};

}  // namespace kbm
