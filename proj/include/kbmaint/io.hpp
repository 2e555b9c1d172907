#pragma once

// File formats: network documents, change scripts, and the CSV reports.
//
// Network document:
//   { "format_version": 1, "version_label": "...",
//     "variables": [ {"id", "name", "outcomes": [...]}, ... ],
//     "parents":   { id: [parent ids in order] },
//     "cpts":      { id: [[row], ...] } }   // rows in configuration order
//
// Change script: a JSON array of edit records, each with an "op" field. All
// elicited blocks are lists of {"given": {parent: outcome}, "probs": [...]}.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kbmaint/cost.hpp"
#include "kbmaint/edit.hpp"
#include "kbmaint/network.hpp"

namespace kbm {

inline constexpr int kFormatVersion = 1;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace detail {

using Json = nlohmann::ordered_json;

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline const Json& field(const Json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(ctx + ": missing field '" + key + "'");
  return *it;
}

inline std::string get_string(const Json& j, const std::string& ctx) {
  if (!j.is_string()) throw ParseError(ctx + " must be a string");
  return j.get<std::string>();
}

inline std::vector<std::string> get_strings(const Json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + " must be an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_string(j[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> get_numbers(const Json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(ctx + "[" + std::to_string(i) + "] must be a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

inline Json numbers_json(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(x);
  return a;
}

}  // namespace detail

inline Network parse_network(std::string_view text) {
  using namespace detail;
  const Json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("network document must be a JSON object");

  const Json& fv = field(doc, "format_version", "network");
  if (!fv.is_number_integer() || fv.get<int>() != kFormatVersion)
    throw ParseError("unsupported format_version (expected " + std::to_string(kFormatVersion) + ")");

  Network net;
  net.version_label = get_string(field(doc, "version_label", "network"), "version_label");

  const Json& vars = field(doc, "variables", "network");
  if (!vars.is_array()) throw ParseError("variables must be an array");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string ctx = "variables[" + std::to_string(i) + "]";
    if (!vars[i].is_object()) throw ParseError(ctx + " must be an object");
    Variable v;
    v.id = get_string(field(vars[i], "id", ctx), ctx + ".id");
    v.name = vars[i].contains("name") ? get_string(vars[i]["name"], ctx + ".name") : v.id;
    v.outcomes = get_strings(field(vars[i], "outcomes", ctx), ctx + ".outcomes");
    net.variables.push_back(std::move(v));
  }

  if (auto it = doc.find("parents"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("parents must be an object");
    for (const auto& [id, list] : it->items())
      net.parents[id] = get_strings(list, "parents." + id);
  }
  for (const auto& v : net.variables) net.parents.try_emplace(v.id);

  const Json& cpts = field(doc, "cpts", "network");
  if (!cpts.is_object()) throw ParseError("cpts must be an object");
  for (const auto& [id, rows] : cpts.items()) {
    const std::string ctx = "cpts." + id;
    if (!rows.is_array()) throw ParseError(ctx + " must be an array of rows");
    Cpt cpt{id, net.parents_of(id), {}};
    for (std::size_t j = 0; j < rows.size(); ++j)
      cpt.rows.push_back(get_numbers(rows[j], ctx + "[" + std::to_string(j) + "]"));
    net.cpts.emplace(id, std::move(cpt));
  }
  return net;
}

inline std::string serialize_network(const Network& net) {
  using detail::Json;
  if (!net.pending.empty())
    throw MaintenanceError("network has successors awaiting re-encoding; cannot serialize");
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["version_label"] = net.version_label;
  doc["variables"] = Json::array();
  for (const auto& v : net.variables)
    doc["variables"].push_back({{"id", v.id}, {"name", v.name}, {"outcomes", v.outcomes}});

  Json parents = Json::object();
  for (const auto& v : net.variables) parents[v.id] = net.parents_of(v.id);
  for (const auto& [id, ps] : net.parents)
    if (!parents.contains(id)) parents[id] = ps;
  doc["parents"] = std::move(parents);

  Json cpts = Json::object();
  auto put = [&](const Cpt& cpt) {
    Json rows = Json::array();
    for (const auto& r : cpt.rows) rows.push_back(detail::numbers_json(r));
    cpts[cpt.node] = std::move(rows);
  };
  for (const auto& v : net.variables)
    if (auto it = net.cpts.find(v.id); it != net.cpts.end()) put(it->second);
  for (const auto& [id, cpt] : net.cpts)
    if (!cpts.contains(id)) put(cpt);
  doc["cpts"] = std::move(cpts);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Change scripts

namespace detail {

inline Elicitation get_elicitation(const Json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + " must be an array of rows");
  Elicitation out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string rc = ctx + "[" + std::to_string(i) + "]";
    if (!j[i].is_object()) throw ParseError(rc + " must be an object");
    ElicitedRow row;
    if (auto it = j[i].find("given"); it != j[i].end()) {
      if (!it->is_object()) throw ParseError(rc + ".given must be an object");
      for (const auto& [k, v] : it->items()) row.given[k] = get_string(v, rc + ".given." + k);
    }
    row.probs = get_numbers(field(j[i], "probs", rc), rc + ".probs");
    out.push_back(std::move(row));
  }
  return out;
}

inline Elicitation optional_elicitation(const Json& obj, const std::string& ctx) {
  auto it = obj.find("elicited");
  return it == obj.end() ? Elicitation{} : get_elicitation(*it, ctx + ".elicited");
}

inline Json elicitation_json(const Elicitation& e) {
  Json a = Json::array();
  for (const auto& row : e) {
    Json given = Json::object();
    for (const auto& [k, v] : row.given) given[k] = v;
    a.push_back({{"given", std::move(given)}, {"probs", numbers_json(row.probs)}});
  }
  return a;
}

inline std::vector<SuccessorPlan> get_plans(const Json& obj, const std::string& ctx) {
  std::vector<SuccessorPlan> out;
  auto it = obj.find("successors");
  if (it == obj.end()) return out;
  if (!it->is_array()) throw ParseError(ctx + ".successors must be an array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const Json& s = (*it)[i];
    const std::string sc = ctx + ".successors[" + std::to_string(i) + "]";
    if (!s.is_object()) throw ParseError(sc + " must be an object");
    SuccessorPlan plan;
    plan.successor = get_string(field(s, "node", sc), sc + ".node");
    if (auto r = s.find("reuse"); r != s.end()) {
      if (!r->is_boolean()) throw ParseError(sc + ".reuse must be a boolean");
      plan.reuse = r->get<bool>();
    }
    plan.rows = optional_elicitation(s, sc);
    out.push_back(std::move(plan));
  }
  return out;
}

inline Json plans_json(const std::vector<SuccessorPlan>& plans) {
  Json a = Json::array();
  for (const auto& p : plans)
    a.push_back({{"node", p.successor}, {"reuse", p.reuse}, {"elicited", elicitation_json(p.rows)}});
  return a;
}

inline Mode get_mode(const Json& obj, const std::string& ctx) {
  auto it = obj.find("mode");
  if (it == obj.end()) return Mode::General;
  const auto s = get_string(*it, ctx + ".mode");
  if (s == "general") return Mode::General;
  if (s == "ignored") return Mode::IgnoredOutcome;
  if (s == "split") return Mode::SplitOutcome;
  if (s == "assumed_constant" || s == "assumed-constant") return Mode::AssumedConstant;
  throw ParseError(ctx + ".mode: unknown mode '" + s + "'");
}

inline std::optional<std::string> optional_string(const Json& obj, const char* key,
                                                  const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return get_string(*it, ctx + "." + key);
}

inline EditOp parse_edit(const Json& j, const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + " must be an object");
  const auto kind = get_string(field(j, "op", ctx), ctx + ".op");
  auto str = [&](const char* key) { return get_string(field(j, key, ctx), ctx + "." + key); };
  auto strs = [&](const char* key) { return get_strings(field(j, key, ctx), ctx + "." + key); };

  EditOp op;
  op.mode = get_mode(j, ctx);
  if (kind == "add_outcomes") {
    op.change = AddOutcomes{str("node"), strs("outcomes"), optional_elicitation(j, ctx),
                            get_plans(j, ctx)};
  } else if (kind == "split_outcome") {
    SplitOutcome e{str("node"), str("outcome"), strs("parts"), SplitInput::Weights,
                   optional_elicitation(j, ctx), get_plans(j, ctx)};
    if (auto in = optional_string(j, "input", ctx)) {
      if (*in == "probs") e.input = SplitInput::Probabilities;
      else if (*in != "weights") throw ParseError(ctx + ".input must be 'weights' or 'probs'");
    }
    op.change = std::move(e);
  } else if (kind == "add_variable") {
    const Json& v = field(j, "variable", ctx);
    if (!v.is_object()) throw ParseError(ctx + ".variable must be an object");
    Variable var;
    var.id = get_string(field(v, "id", ctx + ".variable"), ctx + ".variable.id");
    var.name = v.contains("name") ? get_string(v["name"], ctx + ".variable.name") : var.id;
    var.outcomes = get_strings(field(v, "outcomes", ctx + ".variable"), ctx + ".variable.outcomes");
    std::vector<std::string> parents;
    if (j.contains("parents")) parents = strs("parents");
    op.change = AddVariable{std::move(var), std::move(parents), optional_elicitation(j, ctx),
                            optional_string(j, "baseline", ctx), get_plans(j, ctx)};
  } else if (kind == "add_arc") {
    op.change = AddArc{str("from"), str("to"), optional_string(j, "baseline", ctx),
                       optional_elicitation(j, ctx)};
  } else if (kind == "remove_arc") {
    op.change = RemoveArc{str("from"), str("to"), optional_elicitation(j, ctx)};
  } else if (kind == "remove_outcome") {
    RemoveOutcome e{str("node"), str("outcome"), {}, false};
    if (auto it = j.find("replacements"); it != j.end()) {
      if (!it->is_object()) throw ParseError(ctx + ".replacements must be an object");
      for (const auto& [id, rows] : it->items())
        e.replacements[id] = get_elicitation(rows, ctx + ".replacements." + id);
    }
    if (auto it = j.find("renormalize"); it != j.end()) {
      if (!it->is_boolean()) throw ParseError(ctx + ".renormalize must be a boolean");
      e.renormalize = it->get<bool>();
    }
    op.change = std::move(e);
  } else if (kind == "replace_cpt") {
    op.change = ReplaceCpt{str("node"), optional_elicitation(j, ctx)};
  } else {
    throw ParseError(ctx + ": unknown op '" + kind + "'");
  }
  return op;
}

inline Json edit_json(const EditOp& op) {
  Json j;
  j["op"] = to_string(op.kind());
  j["mode"] = to_string(op.mode);
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, AddOutcomes>) {
          j["node"] = e.node;
          j["outcomes"] = e.outcomes;
          j["elicited"] = elicitation_json(e.elicited);
          j["successors"] = plans_json(e.successors);
        } else if constexpr (std::is_same_v<T, SplitOutcome>) {
          j["node"] = e.node;
          j["outcome"] = e.outcome;
          j["parts"] = e.parts;
          j["input"] = e.input == SplitInput::Weights ? "weights" : "probs";
          j["elicited"] = elicitation_json(e.elicited);
          j["successors"] = plans_json(e.successors);
        } else if constexpr (std::is_same_v<T, AddVariable>) {
          j["variable"] = {{"id", e.variable.id},
                           {"name", e.variable.name},
                           {"outcomes", e.variable.outcomes}};
          j["parents"] = e.parents;
          if (e.baseline) j["baseline"] = *e.baseline;
          j["elicited"] = elicitation_json(e.elicited);
          j["successors"] = plans_json(e.successors);
        } else if constexpr (std::is_same_v<T, AddArc>) {
          j["from"] = e.from;
          j["to"] = e.to;
          if (e.baseline) j["baseline"] = *e.baseline;
          j["elicited"] = elicitation_json(e.elicited);
        } else if constexpr (std::is_same_v<T, RemoveArc>) {
          j["from"] = e.from;
          j["to"] = e.to;
          j["elicited"] = elicitation_json(e.elicited);
        } else if constexpr (std::is_same_v<T, RemoveOutcome>) {
          j["node"] = e.node;
          j["outcome"] = e.outcome;
          j["renormalize"] = e.renormalize;
          Json reps = Json::object();
          for (const auto& [id, rows] : e.replacements) reps[id] = elicitation_json(rows);
          j["replacements"] = std::move(reps);
        } else {
          j["node"] = e.node;
          j["elicited"] = elicitation_json(e.elicited);
        }
      },
      op.change);
  return j;
}

}  // namespace detail

// Errors name the 1-based index of the offending record.
inline std::vector<EditOp> parse_script(std::string_view text) {
  using namespace detail;
  const Json doc = parse_json(text);
  if (!doc.is_array()) throw ParseError("change script must be a JSON array");
  std::vector<EditOp> ops;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string ctx = "op " + std::to_string(i + 1);
    ops.push_back(parse_edit(doc[i], ctx));
  }
  return ops;
}

inline std::string serialize_script(const std::vector<EditOp>& ops) {
  detail::Json doc = detail::Json::array();
  for (const auto& op : ops) doc.push_back(detail::edit_json(op));
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// CSV

inline std::string report_csv(const AssessmentReport& report) {
  std::string out = "node,elicited,reused,general_baseline\n";
  for (const auto& n : report.nodes)
    out += n.node + "," + std::to_string(n.elicited) + "," + std::to_string(n.reused) + "," +
           std::to_string(n.general_baseline) + "\n";
  return out;
}

inline std::string curves_csv(CostCase c, CostRole role, const std::vector<CurvePoint>& points) {
  std::string out = "case,role,m,k,ratio\n";
  for (const auto& p : points)
    out += std::string(to_string(c)) + "," + to_string(role) + "," + std::to_string(p.m) + "," +
           std::to_string(p.k) + "," + (p.ratio ? format_double(*p.ratio) : "") + "\n";
  return out;
}

}  // namespace kbm
