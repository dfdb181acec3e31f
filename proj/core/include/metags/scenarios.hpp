#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metags/extract.hpp"
#include "metags/graph.hpp"

namespace metags {

enum class Scenario { SingleHg, MultiHgSingleHet, MultiHgMultiHet };

Scenario scenario_from_string(const std::string& s);
const char* scenario_name(Scenario s);

struct ScenarioSplits {
  SplitSpec train;
  SplitSpec val;
  SplitSpec test;
  // Applied scale factors and skipped graphs, for the run log.
  std::vector<std::string> notes;
};

// Relation-disjoint episode splits per scenario:
//  - single-hg: within every graph, relations split 5/3/rest (scaled
//    proportionally below 10 relations).
//  - multi-hg-single-het: graphs split 4/2/4-proportioned; requires one
//    shared type vocabulary across all graphs.
//  - multi-hg-multi-het: the corpus's own graph split; requires disjoint
//    type vocabularies between train/val graphs and test graphs.
ScenarioSplits build_scenario(const GraphCorpus& corpus, Scenario which, uint64_t seed);

}  // namespace metags
