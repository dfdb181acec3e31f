#include "metags/scenarios.hpp"

#include <algorithm>
#include <set>

#include "metags/errors.hpp"
#include "metags/rng.hpp"

namespace metags {

Scenario scenario_from_string(const std::string& s) {
  if (s == "single-hg") return Scenario::SingleHg;
  if (s == "multi-hg-single-het") return Scenario::MultiHgSingleHet;
  if (s == "multi-hg-multi-het") return Scenario::MultiHgMultiHet;
  throw ConfigError("unknown scenario '" + s +
                    "' (expected single-hg|multi-hg-single-het|multi-hg-multi-het)");
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::SingleHg: return "single-hg";
    case Scenario::MultiHgSingleHet: return "multi-hg-single-het";
    case Scenario::MultiHgMultiHet: return "multi-hg-multi-het";
  }
  return "?";
}

namespace {

std::vector<std::string> relation_names(const HeterogeneousGraph& g) {
  std::vector<std::string> names;
  for (const auto& [name, pairs] : g.relations) names.push_back(name);
  return names;  // std::map order: deterministic
}

ScenarioSplits single_hg(const GraphCorpus& corpus, uint64_t seed) {
  ScenarioSplits out;
  int usable = 0;
  for (const HeterogeneousGraph& g : corpus.graphs) {
    std::vector<std::string> names = relation_names(g);
    const int n = int(names.size());
    if (n < 3) {
      out.notes.push_back("single-hg: graph '" + g.id +
                          "' skipped: needs >= 3 relations for a train/val/test split");
      continue;
    }
    int n_train, n_val;
    if (n >= 10) {
      n_train = 5;
      n_val = 3;
    } else {
      // scale the 5/3/rest recipe proportionally
      n_train = std::max(1, n * 5 / 10);
      n_val = std::max(1, n * 3 / 10);
      out.notes.push_back("single-hg: graph '" + g.id + "' has " + std::to_string(n) +
                          " relations; scaled split " + std::to_string(n_train) + "/" +
                          std::to_string(n_val) + "/" + std::to_string(n - n_train - n_val));
    }
    int n_test = n - n_train - n_val;
    if (n_test < 1) {
      out.notes.push_back("single-hg: graph '" + g.id + "' skipped: no relations left for test");
      continue;
    }
    Rng rng = Rng::derive(seed, {Rng::key("scenario1"), fnv1a(g.id)});
    rng.shuffle(names);
    SplitSpec::GraphRelations train{g.id, {names.begin(), names.begin() + n_train}};
    SplitSpec::GraphRelations val{g.id, {names.begin() + n_train, names.begin() + n_train + n_val}};
    SplitSpec::GraphRelations test{g.id, {names.begin() + n_train + n_val, names.end()}};
    for (auto* rels : {&train.relations, &val.relations, &test.relations}) {
      std::sort(rels->begin(), rels->end());
    }
    out.train.graphs.push_back(std::move(train));
    out.val.graphs.push_back(std::move(val));
    out.test.graphs.push_back(std::move(test));
    ++usable;
  }
  if (usable == 0) {
    throw InsufficientDataError("single-hg: no graph has enough relations to split");
  }
  return out;
}

ScenarioSplits multi_hg_single_het(const GraphCorpus& corpus, uint64_t seed) {
  if (corpus.graphs.size() < 3) {
    throw InsufficientDataError("multi-hg-single-het: needs >= 3 graphs");
  }
  // fixed heterogeneity: one shared type vocabulary
  auto type_set = [](const std::vector<std::string>& v) {
    return std::set<std::string>(v.begin(), v.end());
  };
  const HeterogeneousGraph& first = corpus.graphs.front();
  for (const HeterogeneousGraph& g : corpus.graphs) {
    if (type_set(g.object_types) != type_set(first.object_types) ||
        type_set(g.link_types) != type_set(first.link_types)) {
      throw ValidationError("multi-hg-single-het: graphs '" + first.id + "' and '" + g.id +
                            "' have different type vocabularies");
    }
  }
  std::vector<std::string> ids;
  for (const HeterogeneousGraph& g : corpus.graphs) ids.push_back(g.id);
  Rng rng = Rng::derive(seed, {Rng::key("scenario2")});
  rng.shuffle(ids);
  const int n = int(ids.size());
  int n_train = std::max(1, n * 4 / 10);
  int n_val = std::max(1, n * 2 / 10);
  int n_test = n - n_train - n_val;
  if (n_test < 1) {
    throw InsufficientDataError("multi-hg-single-het: not enough graphs for a test split");
  }
  ScenarioSplits out;
  out.notes.push_back("multi-hg-single-het: graph split " + std::to_string(n_train) + "/" +
                      std::to_string(n_val) + "/" + std::to_string(n_test));
  for (int i = 0; i < n; ++i) {
    SplitSpec::GraphRelations gr{ids[size_t(i)], relation_names(corpus.graph(ids[size_t(i)]))};
    if (i < n_train) {
      out.train.graphs.push_back(std::move(gr));
    } else if (i < n_train + n_val) {
      out.val.graphs.push_back(std::move(gr));
    } else {
      out.test.graphs.push_back(std::move(gr));
    }
  }
  return out;
}

ScenarioSplits multi_hg_multi_het(const GraphCorpus& corpus) {
  if (corpus.train_ids.empty() || corpus.test_ids.empty()) {
    throw InsufficientDataError("multi-hg-multi-het: corpus split needs train and test graphs");
  }
  // different heterogeneities: train/val vocabularies disjoint from test
  auto type_set = [](const std::vector<std::string>& v) {
    return std::set<std::string>(v.begin(), v.end());
  };
  std::vector<std::string> source_ids = corpus.train_ids;
  source_ids.insert(source_ids.end(), corpus.val_ids.begin(), corpus.val_ids.end());
  for (const std::string& sid : source_ids) {
    const HeterogeneousGraph& a = corpus.graph(sid);
    std::set<std::string> a_obj = type_set(a.object_types);
    std::set<std::string> a_lnk = type_set(a.link_types);
    for (const std::string& tid : corpus.test_ids) {
      const HeterogeneousGraph& b = corpus.graph(tid);
      for (const std::string& t : b.object_types) {
        if (a_obj.count(t)) {
          throw ValidationError("multi-hg-multi-het: graphs '" + a.id + "' and '" + b.id +
                                "' share object type '" + t + "'");
        }
      }
      for (const std::string& t : b.link_types) {
        if (a_lnk.count(t)) {
          throw ValidationError("multi-hg-multi-het: graphs '" + a.id + "' and '" + b.id +
                                "' share link type '" + t + "'");
        }
      }
    }
  }
  ScenarioSplits out;
  auto fill = [&](SplitSpec& spec, const std::vector<std::string>& ids) {
    for (const std::string& gid : ids) {
      spec.graphs.push_back({gid, relation_names(corpus.graph(gid))});
    }
  };
  fill(out.train, corpus.train_ids);
  fill(out.val, corpus.val_ids);
  fill(out.test, corpus.test_ids);
  return out;
}

}  // namespace

ScenarioSplits build_scenario(const GraphCorpus& corpus, Scenario which, uint64_t seed) {
  switch (which) {
    case Scenario::SingleHg: return single_hg(corpus, seed);
    case Scenario::MultiHgSingleHet: return multi_hg_single_het(corpus, seed);
    case Scenario::MultiHgMultiHet: return multi_hg_multi_het(corpus);
  }
  throw ConfigError("build_scenario: bad scenario");
}

}  // namespace metags
