#pragma once

// Command-line front door. `run_cli` takes the argument list and output
// streams so it can be driven in-process by tests.
//
// Exit codes: 0 success, 1 domain failure (validation finding, rejected
// edit, differing networks), 2 usage or parse failure.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kbmaint/cost.hpp"
#include "kbmaint/diff.hpp"
#include "kbmaint/io.hpp"
#include "kbmaint/maintenance.hpp"
#include "kbmaint/network.hpp"
#include "kbmaint/oracle.hpp"

namespace kbm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kJointCapEnv = "KBMAINT_JOINT_CAP";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary and renames over `path`, so readers never see
// a partial file and a failure leaves `path` as it was.
inline void write_file_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::random_device rd;
  const fs::path tmp =
      target.parent_path() / (target.filename().string() + ".tmp-" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot replace " + path + ": " + ec.message());
  }
}

namespace cli_detail {

inline CostCase parse_case(const std::string& s) {
  if (s == "ignored") return CostCase::IgnoredOutcome;
  if (s == "split") return CostCase::SplitOutcome;
  if (s == "assumed-constant" || s == "assumed_constant") return CostCase::AssumedConstant;
  throw UsageError("unknown case '" + s + "' (ignored, split, assumed-constant)");
}

inline CostRole parse_role(const std::string& s) {
  if (s == "changed") return CostRole::ChangedNode;
  if (s == "successor") return CostRole::Successor;
  throw UsageError("unknown role '" + s + "' (changed, successor)");
}

inline std::uint64_t parse_count(const std::string& s) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    throw UsageError("expected a non-negative integer, got '" + s + "'");
  return v;
}

// "2,3,4" or "1:6" (inclusive).
inline std::vector<std::uint64_t> parse_range(const std::string& s) {
  std::vector<std::uint64_t> out;
  if (auto colon = s.find(':'); colon != std::string::npos) {
    const auto lo = parse_count(s.substr(0, colon));
    const auto hi = parse_count(s.substr(colon + 1));
    if (lo > hi) throw UsageError("empty range '" + s + "'");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(item));
  if (out.empty()) throw UsageError("empty list '" + s + "'");
  return out;
}

inline std::size_t joint_cap() {
  if (const char* env = std::getenv(kJointCapEnv)) {
    try {
      return static_cast<std::size_t>(parse_count(env));
    } catch (const UsageError&) {
      throw UsageError(std::string(kJointCapEnv) + " must be a positive integer");
    }
  }
  return kDefaultJointCap;
}

inline Network load_network(const std::string& path) { return parse_network(read_file(path)); }

inline int cmd_validate(const std::string& path, double tolerance, std::ostream& out) {
  const auto net = load_network(path);
  const auto report = validate_network(net, tolerance);
  for (const auto& f : report.findings) out << f.message << "\n";
  return report.ok() ? kExitOk : kExitDomain;
}

inline int cmd_apply(const std::string& network_path, const std::string& script_path,
                     const std::string& out_path, const std::string& report_path,
                     std::ostream& out, std::ostream& err) {
  const auto net = load_network(network_path);
  const auto ops = parse_script(read_file(script_path));

  if (auto check = validate_network(net); !check.ok()) {
    for (const auto& f : check.findings) err << f.message << "\n";
    err << "input network is invalid; nothing applied\n";
    return kExitDomain;
  }

  Network current = net;
  std::map<std::string, NodeAssessment> totals;
  std::vector<std::string> notes;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    try {
      auto t = apply_edit(current, ops[i]);
      if (auto check = validate_network(t.after); !check.ok())
        throw MaintenanceError(check.findings.front().message);
      for (const auto& n : t.report.nodes) {
        auto& acc = totals[n.node];
        acc.node = n.node;
        acc.elicited += n.elicited;
        acc.reused += n.reused;
        acc.general_baseline += n.general_baseline;
        acc.renormalized = acc.renormalized || n.renormalized;
      }
      for (const auto& note : t.report.notes) notes.push_back("op " + std::to_string(i + 1) + ": " + note);
      current = std::move(t.after);
    } catch (const std::exception& e) {
      err << "op " << (i + 1) << " (" << to_string(ops[i].kind()) << ") failed: " << e.what()
          << "\n";
      err << "no output written\n";
      return kExitDomain;
    }
  }

  AssessmentReport report;
  for (const auto& v : current.variables) {
    auto it = totals.find(v.id);
    report.nodes.push_back(it == totals.end() ? NodeAssessment{v.id, 0, 0, 0, false} : it->second);
  }
  report.notes = notes;

  write_file_atomically(out_path, serialize_network(current));
  const auto csv = report_csv(report);
  if (report_path.empty())
    out << csv;
  else
    write_file_atomically(report_path, csv);
  for (const auto& note : notes) err << note << "\n";
  return kExitOk;
}

inline int cmd_cost(const std::string& which, const std::string& role, std::uint64_t m,
                    std::uint64_t k, std::uint64_t p, const std::string& radices,
                    std::ostream& out) {
  CostQuery q;
  q.which = parse_case(which);
  q.role = parse_role(role);
  q.m = m;
  q.k = k;
  q.p = p;
  if (!radices.empty()) q.radices = parse_range(radices);
  try {
    validate_query(q);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto r = assessment_cost(q);
  out << "general=" << r.general << ", special=" << r.special
      << ", ratio=" << (r.ratio ? format_double(*r.ratio) : std::string("undefined")) << "\n";
  return kExitOk;
}

inline int cmd_curves(const std::string& which, const std::string& role,
                      const std::string& m_range, const std::string& k_range,
                      const std::string& out_path, std::ostream& out) {
  std::vector<CostCase> cases;
  std::vector<CostRole> roles;
  if (which == "all")
    cases = {CostCase::IgnoredOutcome, CostCase::SplitOutcome, CostCase::AssumedConstant};
  else
    cases = {parse_case(which)};
  if (role == "all")
    roles = {CostRole::ChangedNode, CostRole::Successor};
  else
    roles = {parse_role(role)};
  const auto ms = parse_range(m_range);
  const auto ks = parse_range(k_range);

  std::string csv;
  for (auto c : cases) {
    for (auto r : roles) {
      std::vector<CurvePoint> points;
      try {
        points = ratio_curves(c, r, ms, ks);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      auto block = curves_csv(c, r, points);
      csv += csv.empty() ? block : block.substr(block.find('\n') + 1);
    }
  }
  if (out_path.empty())
    out << csv;
  else
    write_file_atomically(out_path, csv);
  return kExitOk;
}

inline int cmd_diff(const std::string& a_path, const std::string& b_path, std::ostream& out) {
  const auto a = load_network(a_path);
  const auto b = load_network(b_path);
  const auto d = diff_networks(a, b);
  out << format_diff(d);
  return d.identical() ? kExitOk : kExitDomain;
}

inline int cmd_oracle_joint(const std::string& path, std::ostream& out) {
  const auto net = load_network(path);
  const auto joint = joint_distribution(net, joint_cap());
  for (const auto& v : joint.variables) out << v << ",";
  out << "probability\n";
  std::vector<std::size_t> digits(joint.variables.size(), 0);
  for (double cell : joint.cells) {
    for (std::size_t i = 0; i < digits.size(); ++i) out << joint.outcomes[i][digits[i]] << ",";
    out << format_double(cell) << "\n";
    for (std::size_t i = digits.size(); i-- > 0;) {
      if (++digits[i] < joint.radices[i]) break;
      digits[i] = 0;
    }
  }
  return kExitOk;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Maintenance engine for discrete probabilistic knowledge bases", "kbmaint"};
  app.require_subcommand(1);

  std::string network, script, out_path, report_path, other, which, role, radices;
  std::string m_range = "1:6", k_range = "1:10";
  double tolerance = kRowTolerance;
  std::uint64_t m = 1, k = 1, p = 2;

  auto* validate = app.add_subcommand("validate", "Check a network file against its invariants");
  validate->add_option("network", network, "Network file")->required();
  validate->add_option("--tolerance", tolerance, "Row-sum tolerance")->check(CLI::NonNegativeNumber);

  auto* apply = app.add_subcommand("apply", "Apply a change script; writes nothing unless every op succeeds");
  apply->add_option("network", network, "Network file")->required();
  apply->add_option("script", script, "Change script")->required();
  apply->add_option("-o,--out", out_path, "Output network file")->required();
  apply->add_option("--report", report_path, "Write the assessment CSV here instead of stdout");

  auto* cost = app.add_subcommand("cost", "Assessment counts for one special case");
  cost->add_option("--case", which, "ignored | split | assumed-constant")->required();
  cost->add_option("--role", role, "changed | successor")->required();
  cost->add_option("--m", m, "Old outcome count of the changed node");
  cost->add_option("--k", k, "Added outcomes, split parts, or outcomes of the new parent");
  cost->add_option("--p", p, "Outcome count of the successor");
  cost->add_option("--radices", radices, "Outcome counts of the conditioning set, e.g. 2,3");

  auto* curves = app.add_subcommand("curves", "Ratio curves as CSV");
  curves->add_option("--case", which, "ignored | split | assumed-constant | all")->required();
  curves->add_option("--role", role, "changed | successor | all")->required();
  curves->add_option("--m-range", m_range, "m values: lo:hi or a,b,c");
  curves->add_option("--k-range", k_range, "k values: lo:hi or a,b,c");
  curves->add_option("--out", out_path, "Output CSV file (stdout if omitted)");

  auto* diff = app.add_subcommand("diff", "Structural and numeric diff of two networks");
  diff->add_option("a", network, "First network")->required();
  diff->add_option("b", other, "Second network")->required();

  auto* oracle = app.add_subcommand("oracle", "Debugging aids");
  oracle->group("");
  oracle->require_subcommand(1);
  auto* joint = oracle->add_subcommand("joint", "Dump the full joint table as CSV");
  joint->add_option("network", network, "Network file")->required();

  std::vector<const char*> argv{"kbmaint"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(network, tolerance, out);
    if (*apply) return cmd_apply(network, script, out_path, report_path, out, err);
    if (*cost) return cmd_cost(which, role, m, k, p, radices, out);
    if (*curves) return cmd_curves(which, role, m_range, k_range, out_path, out);
    if (*diff) return cmd_diff(network, other, out);
    if (*joint) return cmd_oracle_joint(network, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace kbm
