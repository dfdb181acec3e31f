#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "metags/errors.hpp"
#include "metags/graph.hpp"
#include "metags/synthgen.hpp"
#include "test_support.hpp"

using namespace metags;

namespace {

const char* kMinimalCorpus = R"({
  "graphs": [{
    "id": "g0",
    "object_types": ["user", "school"],
    "link_types": ["studies"],
    "objects": [
      {"id": 0, "type": 0, "feature": [1.0]},
      {"id": 1, "type": 1, "feature": [2.0]}
    ],
    "links": [[0, 1, 0]],
    "relations": {"knows": [[0, 1]]}
  }],
  "split": {"train": ["g0"], "val": [], "test": []}
})";

std::string with_links(const std::string& links) {
  std::string doc = kMinimalCorpus;
  return doc.replace(doc.find("[[0, 1, 0]]"), 11, links);
}

bool corpus_equal(const GraphCorpus& a, const GraphCorpus& b) {
  if (a.graphs.size() != b.graphs.size()) return false;
  if (a.train_ids != b.train_ids || a.val_ids != b.val_ids || a.test_ids != b.test_ids) {
    return false;
  }
  for (size_t i = 0; i < a.graphs.size(); ++i) {
    const HeterogeneousGraph& ga = a.graphs[i];
    const HeterogeneousGraph& gb = b.graphs[i];
    if (ga.id != gb.id || ga.object_types != gb.object_types || ga.link_types != gb.link_types) {
      return false;
    }
    if (ga.links != gb.links || ga.relations != gb.relations) return false;
    if (ga.objects.size() != gb.objects.size()) return false;
    for (size_t j = 0; j < ga.objects.size(); ++j) {
      if (ga.objects[j].id != gb.objects[j].id) return false;
      if (ga.objects[j].type_id != gb.objects[j].type_id) return false;
      if (ga.objects[j].feature != gb.objects[j].feature) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("minimal legal corpus loads") {
  GraphCorpus c = corpus_from_json(kMinimalCorpus, "inline");
  REQUIRE(c.graphs.size() == 1);
  CHECK(c.graphs[0].n_objects() == 2);
  CHECK(c.graphs[0].n_links() == 1);
}

TEST_CASE("dangling link reference is rejected with the offending id") {
  std::string doc = with_links("[[0, 99, 0]]");
  CHECK_THROWS_WITH_AS(corpus_from_json(doc, "inline"),
                       doctest::Contains("unknown object id 99"), ValidationError);
}

TEST_CASE("self-loops, duplicate links and bad types are rejected") {
  CHECK_THROWS_AS(corpus_from_json(with_links("[[0, 0, 0]]"), "in"), ValidationError);
  CHECK_THROWS_AS(corpus_from_json(with_links("[[0, 1, 0], [0, 1, 0]]"), "in"), ValidationError);
  CHECK_THROWS_AS(corpus_from_json(with_links("[[0, 1, 7]]"), "in"), ValidationError);
}

TEST_CASE("directed input symmetrizes to one undirected link") {
  GraphCorpus c = corpus_from_json(with_links("[[0, 1, 0], [1, 0, 0]]"), "inline");
  CHECK(c.graphs[0].n_links() == 1);
  CHECK(c.graphs[0].neighbors(0).size() == 1);
  CHECK(c.graphs[0].neighbors(1).size() == 1);
}

TEST_CASE("heterogeneity condition |A| + |R| > 2 is enforced") {
  std::string doc = kMinimalCorpus;
  doc.replace(doc.find(R"(["user", "school"])"), 18, R"(["user"])");
  CHECK_THROWS_AS(corpus_from_json(doc, "inline"), ValidationError);
}

TEST_CASE("empty relation class is rejected") {
  std::string doc = kMinimalCorpus;
  doc.replace(doc.find(R"([[0, 1]])"), 8, "[]");
  CHECK_THROWS_WITH_AS(corpus_from_json(doc, "inline"),
                       doctest::Contains("empty relation class"), ValidationError);
}

TEST_CASE("malformed json reports a parse locus") {
  CHECK_THROWS_AS(corpus_from_json("{not json", "broken.json"), ParseError);
}

TEST_CASE("neighbors: isolated object and two-object graph") {
  HeterogeneousGraph g = test::make_graph(2, 1, {0, 1, 0}, {{0, 1, 0}});
  CHECK(g.neighbors(2).empty());
  REQUIRE(g.neighbors(0).size() == 1);
  CHECK(g.neighbors(0)[0] == std::pair<int, int>{1, 0});
  CHECK_THROWS_AS(g.neighbors(99), ValidationError);
}

TEST_CASE("neighbors of a star center: ascending order, adjacency-matrix oracle") {
  // center 2 with leaves 0,1,3,4
  HeterogeneousGraph g = test::make_graph(2, 2, {0, 0, 1, 0, 0},
                                          {{2, 4, 1}, {2, 0, 0}, {1, 2, 0}, {2, 3, 1}});
  bool m[5][5] = {};
  for (const Link& l : g.links) m[l.src][l.dst] = m[l.dst][l.src] = true;
  std::vector<int> oracle;
  for (int j = 0; j < 5; ++j) {
    if (m[2][j]) oracle.push_back(j);
  }
  std::vector<int> got;
  for (const auto& [nbr, t] : g.neighbors(2)) got.push_back(nbr);
  CHECK(got == oracle);
  CHECK(got == std::vector<int>{0, 1, 3, 4});
}

TEST_CASE("adjacency symmetry and determinism on a generated corpus") {
  GeneratorConfig cfg;
  cfg.n_graphs = 2;
  cfg.objects_per_graph = 60;
  cfg.pairs_per_relation = 8;
  GraphCorpus corpus = generate_corpus(cfg);
  for (const HeterogeneousGraph& g : corpus.graphs) {
    for (int a = 0; a < g.n_objects(); ++a) {
      auto nbrs = g.neighbors(a);
      CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));
      for (const auto& [b, t] : nbrs) {
        const auto& back = g.neighbors(b);
        CHECK(std::count(back.begin(), back.end(), std::pair<int, int>{a, t}) == 1);
      }
    }
  }
}

TEST_CASE("shortest_distance basics") {
  HeterogeneousGraph g = test::make_graph(2, 1, {0, 1, 0, 0}, {{0, 1, 0}, {1, 2, 0}});
  CHECK(shortest_distance(g, 0, 0) == 0);
  CHECK(shortest_distance(g, 0, 2) == 2);
  CHECK(shortest_distance(g, 2, 0) == 2);
  CHECK(!shortest_distance(g, 0, 3).has_value());
  CHECK_THROWS_AS(shortest_distance(g, 0, 9), ValidationError);
}

TEST_CASE("shortest_distance satisfies the triangle inequality (brute force, <= 50 objects)") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    HeterogeneousGraph g = test::random_graph(seed, 50, 3, 2, 0.05);
    int n = g.n_objects();
    std::vector<std::vector<int>> d(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) d[size_t(i)] = bfs_distances(g.adjacency(), i);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int c = 0; c < n; ++c) {
          if (d[a][b] < 0 || d[b][c] < 0 || d[a][c] < 0) continue;
          CHECK(d[a][c] <= d[a][b] + d[b][c]);
        }
      }
    }
  }
}

TEST_CASE("save/load round trip is structurally identical (generator default output)") {
  GeneratorConfig cfg;
  cfg.n_graphs = 3;
  cfg.objects_per_graph = 80;
  cfg.pairs_per_relation = 10;
  GraphCorpus c = generate_corpus(cfg);
  std::string path = "roundtrip_corpus.json";
  save_corpus(c, path);
  GraphCorpus back = load_corpus(path);
  CHECK(corpus_equal(c, back));
  // and the canonical serialization is byte-stable
  CHECK(corpus_to_json(c) == corpus_to_json(back));
}

TEST_CASE("missing features synthesize one-hot(type) ++ normalized degree") {
  HeterogeneousGraph g = test::make_graph(3, 1, {0, 1, 1}, {{0, 1, 0}, {0, 2, 0}});
  REQUIRE(g.feature(0).size() == 4);
  CHECK(g.feature(0)[0] == 1.0);
  CHECK(g.feature(0)[3] == 1.0);  // degree 2 of max 2
  CHECK(g.feature(1)[1] == 1.0);
  CHECK(g.feature(1)[3] == 0.5);
}

TEST_CASE("corpus split validation") {
  GraphCorpus c = corpus_from_json(kMinimalCorpus, "inline");
  c.test_ids.push_back("g0");  // now in train and test
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.test_ids.clear();
  c.test_ids.push_back("missing");
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("base and novel relation names must be disjoint") {
  std::string doc = R"({
    "graphs": [
      {"id": "a", "object_types": ["x","y"], "link_types": ["l"],
       "objects": [{"id":0,"type":0,"feature":[]},{"id":1,"type":1,"feature":[]}],
       "links": [[0,1,0]], "relations": {"rel": [[0,1]]}},
      {"id": "b", "object_types": ["x","y"], "link_types": ["l"],
       "objects": [{"id":0,"type":0,"feature":[]},{"id":1,"type":1,"feature":[]}],
       "links": [[0,1,0]], "relations": {"rel": [[0,1]]}}
    ],
    "split": {"train": ["a"], "val": [], "test": ["b"]}
  })";
  CHECK_THROWS_WITH_AS(corpus_from_json(doc, "inline"),
                       doctest::Contains("both train and test"), ValidationError);
}
