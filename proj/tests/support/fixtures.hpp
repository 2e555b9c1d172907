#pragma once

#include <string>
#include <vector>

#include "kbmaint/network.hpp"

namespace kbm::testing {

// Appends a variable with its parents and rows (in configuration order).
inline void add_node(Network& net, const std::string& id, std::vector<std::string> outcomes,
                     std::vector<std::string> parents, std::vector<std::vector<double>> rows) {
  net.variables.push_back({id, id, std::move(outcomes)});
  net.parents[id] = parents;
  net.cpts[id] = Cpt{id, std::move(parents), std::move(rows)};
}

// A -> B, P(A) = (0.5, 0.5), P(B | a1) = (0.9, 0.1), P(B | a2) = (0.3, 0.7).
inline Network chain() {
  Network net;
  net.version_label = "E";
  add_node(net, "A", {"a1", "a2"}, {}, {{0.5, 0.5}});
  add_node(net, "B", {"b1", "b2"}, {"A"}, {{0.9, 0.1}, {0.3, 0.7}});
  return net;
}

}  // namespace kbm::testing
