#pragma once

// Shared helpers for the test suites: tiny graph constructors and a
// deterministic random-graph generator independent of the library's
// synthetic corpus generator.

#include <string>
#include <vector>

#include "metags/graph.hpp"
#include "metags/rng.hpp"

namespace metags::test {

// Graph from explicit parts. Types named "T0".."T{n-1}", link types
// "L0".."L{m-1}". Every object gets the given feature (or a one-hot default
// via finalize() when `features` is empty).
inline HeterogeneousGraph make_graph(int n_object_types, int n_link_types,
                                     const std::vector<int>& object_types,
                                     const std::vector<Link>& links,
                                     const std::vector<std::vector<double>>& features = {}) {
  HeterogeneousGraph g;
  g.id = "t0";
  for (int t = 0; t < n_object_types; ++t) g.object_types.push_back("T" + std::to_string(t));
  for (int t = 0; t < n_link_types; ++t) g.link_types.push_back("L" + std::to_string(t));
  for (size_t i = 0; i < object_types.size(); ++i) {
    ObjectRecord o;
    o.id = int(i);
    o.type_id = object_types[i];
    if (!features.empty()) o.feature = features[i];
    g.objects.push_back(std::move(o));
  }
  g.links = links;
  g.finalize();
  return g;
}

// Connected-ish random typed graph for oracle comparisons.
inline HeterogeneousGraph random_graph(uint64_t seed, int n_objects, int n_types, int n_ltypes,
                                       double edge_prob) {
  Rng rng(seed);
  std::vector<int> types;
  for (int i = 0; i < n_objects; ++i) types.push_back(int(rng.next_below(uint64_t(n_types))));
  std::vector<Link> links;
  // spanning chain keeps most pairs reachable
  for (int i = 1; i < n_objects; ++i) {
    links.push_back({i - 1, i, int(rng.next_below(uint64_t(n_ltypes)))});
  }
  for (int a = 0; a < n_objects; ++a) {
    for (int b = a + 2; b < n_objects; ++b) {
      if (rng.next_double() < edge_prob) {
        links.push_back({a, b, int(rng.next_below(uint64_t(n_ltypes)))});
      }
    }
  }
  std::vector<std::vector<double>> feats;
  for (int i = 0; i < n_objects; ++i) {
    feats.push_back({rng.next_normal(), rng.next_normal(), rng.next_normal()});
  }
  return make_graph(n_types, n_ltypes, types, links, feats);
}

}  // namespace metags::test
