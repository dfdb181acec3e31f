#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "metags/errors.hpp"
#include "metags/extract.hpp"
#include "metags/synthgen.hpp"
#include "test_support.hpp"

using namespace metags;

namespace {

ExtractionParams desk_params() {
  ExtractionParams p;
  p.k_path = 20;
  p.l_max = 4;
  p.n_type_min = 2;
  p.n_type_max = 3;
  p.m = 2;
  p.seed = 77;
  return p;
}

// Independent Eq.-1 evaluation for the brute-force comparisons: distinct
// types via sort+unique, cross-type links counted directly.
double oracle_path_score(const HeterogeneousGraph& g, const std::vector<int>& objs) {
  std::vector<int> types;
  for (int o : objs) types.push_back(g.object_type(o));
  std::vector<int> sorted_types = types;
  std::sort(sorted_types.begin(), sorted_types.end());
  sorted_types.erase(std::unique(sorted_types.begin(), sorted_types.end()), sorted_types.end());
  int cross = 0;
  for (size_t i = 1; i < types.size(); ++i) cross += types[i - 1] != types[i] ? 1 : 0;
  // the right factor is the cross-type link proportion, computed as such
  double proportion = double(cross) / double(objs.size() - 1);
  return std::log(double(sorted_types.size())) * proportion;
}

// Independent exhaustive path enumeration (explicit stack, no cap).
std::vector<std::vector<int>> oracle_all_paths(const HeterogeneousGraph& g, int u, int v,
                                               int l_max) {
  std::vector<std::vector<int>> out;
  std::vector<int> path{u};
  std::vector<char> used(size_t(g.n_objects()), 0);
  used[size_t(u)] = 1;
  struct Frame {
    int node;
    size_t next;
  };
  std::vector<Frame> stack{{u, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& nbrs = g.adjacency()[size_t(f.node)];
    if (f.next >= nbrs.size()) {
      used[size_t(f.node)] = 0;
      path.pop_back();
      stack.pop_back();
      continue;
    }
    int nbr = nbrs[f.next++];
    if (nbr == v) {
      if (int(path.size()) <= l_max) {
        std::vector<int> full = path;
        full.push_back(v);
        out.push_back(full);
      }
      continue;
    }
    if (used[size_t(nbr)] || int(path.size()) + 1 > l_max) continue;
    used[size_t(nbr)] = 1;
    path.push_back(nbr);
    stack.push_back({nbr, 0});
  }
  return out;
}

GraphStructure oracle_structure(const HeterogeneousGraph& g, int u, int v, int k_path,
                                int l_max) {
  auto paths = oracle_all_paths(g, u, v, l_max);
  std::vector<std::pair<double, std::vector<int>>> scored;
  for (auto& p : paths) scored.push_back({oracle_path_score(g, p), p});
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    if (a.second.size() != b.second.size()) return a.second.size() < b.second.size();
    return a.second < b.second;
  });
  GraphStructure s;
  s.graph_id = g.id;
  s.u = u;
  s.v = v;
  std::set<int> objects;
  std::set<Link> links;
  for (size_t p = 0; p < std::min(size_t(k_path), scored.size()); ++p) {
    const std::vector<int>& objs = scored[p].second;
    objects.insert(objs.begin(), objs.end());
    for (size_t i = 1; i < objs.size(); ++i) {
      for (const auto& [nbr, t] : g.neighbors(objs[i - 1])) {
        if (nbr == objs[i]) {
          links.insert({std::min(objs[i - 1], objs[i]), std::max(objs[i - 1], objs[i]), t});
        }
      }
    }
  }
  s.objects.assign(objects.begin(), objects.end());
  s.links.assign(links.begin(), links.end());
  return s;
}

}  // namespace

TEST_CASE("path_score worked examples") {
  // u(T0)-x(T0)-v(T0): one object type
  HeterogeneousGraph single = test::make_graph(2, 1, {0, 0, 0}, {{0, 1, 0}, {1, 2, 0}});
  CHECK(path_score(single, {0, 1, 2}) == 0.0);

  // u(T0)-a(T1)-v(T0): two types, both links cross-type
  HeterogeneousGraph wedge = test::make_graph(2, 1, {0, 1, 0}, {{0, 1, 0}, {1, 2, 0}});
  CHECK(path_score(wedge, {0, 1, 2}) == doctest::Approx(0.6931471805599453).epsilon(1e-12));

  // u(T0)-a(T0)-b(T1)-v(T1): two types, 1 of 3 links cross-type
  HeterogeneousGraph chain =
      test::make_graph(2, 1, {0, 0, 1, 1}, {{0, 1, 0}, {1, 2, 0}, {2, 3, 0}});
  CHECK(path_score(chain, {0, 1, 2, 3}) == doctest::Approx(0.23104906018664842).epsilon(1e-12));

  CHECK_THROWS_AS(path_score(chain, {0}), ValidationError);
}

TEST_CASE("path_score equals the brute-force oracle on 1000 random paths") {
  int checked = 0;
  for (uint64_t seed = 0; checked < 1000; ++seed) {
    HeterogeneousGraph g = test::random_graph(seed, 14, 4, 2, 0.2);
    for (const ScoredPath& p : enumerate_paths(g, 0, 13, 6, 200)) {
      CHECK(p.score == oracle_path_score(g, p.objects));  // exact doubles
      ++checked;
      if (checked >= 1000) break;
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("extract_structure: single path, top-1 selection, tie-breaks") {
  // two disjoint u->v routes: high-score wedge (cross-type) and zero-score
  // same-type wedge
  HeterogeneousGraph g = test::make_graph(2, 1, {0, 1, 0, 0},
                                          {{0, 1, 0}, {1, 2, 0}, {0, 3, 0}, {3, 2, 0}});
  ExtractionParams p = desk_params();

  SUBCASE("only one path exists") {
    HeterogeneousGraph chain = test::make_graph(2, 1, {0, 1, 0}, {{0, 1, 0}, {1, 2, 0}});
    GraphStructure s = extract_structure(chain, 0, 2, p);
    CHECK(s.objects == std::vector<int>{0, 1, 2});
    CHECK(s.links.size() == 2);
  }

  SUBCASE("k_path=1 keeps only the better-scoring path") {
    p.k_path = 1;
    GraphStructure s = extract_structure(g, 0, 2, p);
    CHECK(s.objects == std::vector<int>{0, 1, 2});  // via typed object 1, score ln2
    CHECK(s.links.size() == 2);
  }

  SUBCASE("score tie: the shorter path wins") {
    // same-type everywhere: all scores 0; direct link vs 2-hop
    HeterogeneousGraph tie =
        test::make_graph(2, 1, {0, 0, 0}, {{0, 2, 0}, {0, 1, 0}, {1, 2, 0}});
    p.k_path = 1;
    GraphStructure s = extract_structure(tie, 0, 2, p);
    CHECK(s.objects == std::vector<int>{0, 2});
  }

  SUBCASE("score and length tie: lexicographically smaller id sequence wins") {
    HeterogeneousGraph tie = test::make_graph(2, 1, {0, 0, 0, 0},
                                              {{0, 1, 0}, {1, 3, 0}, {0, 2, 0}, {2, 3, 0}});
    p.k_path = 1;
    GraphStructure s = extract_structure(tie, 0, 3, p);
    CHECK(s.objects == std::vector<int>{0, 1, 3});
  }

  SUBCASE("disconnected pair raises NoPath") {
    HeterogeneousGraph split = test::make_graph(2, 1, {0, 0, 1}, {{0, 1, 0}});
    CHECK_THROWS_AS(extract_structure(split, 0, 2, p), NoPathError);
  }
}

TEST_CASE("extract_structure matches the exhaustive oracle on random small graphs") {
  ExtractionParams p = desk_params();
  p.l_max = 5;
  for (uint64_t seed = 100; seed < 112; ++seed) {
    HeterogeneousGraph g = test::random_graph(seed, 18, 4, 2, 0.12);
    // farthest object still within the path-length budget
    std::vector<int> du = bfs_distances(g.adjacency(), 0);
    int v = -1;
    for (int o = 1; o < g.n_objects(); ++o) {
      if (du[size_t(o)] >= 1 && du[size_t(o)] <= p.l_max) v = o;
    }
    REQUIRE(v != -1);
    for (int k_path : {1, 5, 500}) {
      p.k_path = k_path;
      GraphStructure got = extract_structure(g, 0, v, p);
      GraphStructure want = oracle_structure(g, 0, v, k_path, p.l_max);
      CHECK(got.objects == want.objects);
      CHECK(got.links == want.links);
    }
  }
}

TEST_CASE("two-hop mode stays inside the 2-hop ball") {
  HeterogeneousGraph g = test::random_graph(4, 30, 3, 2, 0.08);
  ExtractionParams p = desk_params();
  p.mode = ExtractionParams::Mode::TwoHop;
  GraphStructure s = extract_structure(g, 0, 29, p);
  std::vector<int> du = bfs_distances(g.adjacency(), 0);
  std::vector<int> dv = bfs_distances(g.adjacency(), 29);
  for (int o : s.objects) {
    bool near = (du[size_t(o)] >= 0 && du[size_t(o)] <= 2) ||
                (dv[size_t(o)] >= 0 && dv[size_t(o)] <= 2) || o == 0 || o == 29;
    CHECK(near);
  }
}

TEST_CASE("type_similarity worked examples") {
  // objects: two of T0 (mean [1,0]), one T1 ([1,1]), one T2 ([0,0]), one T3 ([0,1])
  HeterogeneousGraph g = test::make_graph(4, 1, {0, 0, 1, 2, 3},
                                          {{0, 1, 0}, {0, 2, 0}, {0, 3, 0}, {0, 4, 0}});
  EmbeddingTable emb;
  emb.dim = 2;
  emb.vectors = {{2, 0}, {0, 0}, {1, 1}, {0, 0}, {0, 1}};
  GraphStructure s;
  s.graph_id = g.id;
  s.u = 0;
  s.v = 2;
  s.objects = {0, 1, 2, 3, 4};
  s.links = g.links;

  CHECK(type_similarity(g, s, emb, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(type_similarity(g, s, emb, 0, 3) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(type_similarity(g, s, emb, 0, 1) ==
        doctest::Approx(0.7071067811865475).epsilon(1e-12));
  CHECK(type_similarity(g, s, emb, 0, 2) == 0.0);  // zero mean vector
  CHECK_THROWS_AS(type_similarity(g, s, emb, 0, 9), ValidationError);
}

TEST_CASE("repair_isolated") {
  SUBCASE("already reachable: zero links added") {
    SubgraphDraft draft;
    draft.u = 0;
    draft.v = 2;
    draft.objects = {0, 1, 2};
    draft.links = {{0, 1, 0, false}, {1, 2, 0, false}};
    CHECK(repair_isolated(draft, 9) == 0);
    CHECK(draft.links.size() == 2);
  }

  SUBCASE("dropped-type chain: one link from the isolated object to the cut-off query") {
    // chain u-p-q-r-v with p (id 1) dropped: q,r keep reaching v, lose u
    SubgraphDraft draft;
    draft.u = 0;
    draft.v = 4;
    draft.objects = {0, 2, 3, 4};
    draft.links = {{2, 3, 0, false}, {3, 4, 0, false}};
    CHECK(repair_isolated(draft, 9) == 1);
    REQUIRE(draft.links.size() == 3);
    CHECK(draft.links[2].src == 0);
    CHECK(draft.links[2].dst == 2);  // (u, q); r re-accesses u through q
    CHECK(draft.links[2].synthetic);
    CHECK(draft.links[2].type_id == 9);
  }

  SUBCASE("two independent isolated branches need exactly two links") {
    SubgraphDraft draft;
    draft.u = 0;
    draft.v = 1;
    draft.objects = {0, 1, 2, 3, 4, 5};
    draft.links = {{0, 1, 0, false}, {2, 3, 0, false}, {4, 5, 0, false}};
    CHECK(repair_isolated(draft, 9) == 2);
    // reachability restored for everyone (oracle: BFS after repair)
    NormalizedSubgraph sub;
    sub.u = 0;
    sub.v = 1;
    sub.objects = draft.objects;
    sub.links = draft.links;
    sub.selected_types = {0, 1};
    sub.slot = {1, 1, 2, 2, 2, 2};
    sub.finalize_runtime();
    for (size_t i = 0; i < sub.objects.size(); ++i) {
      CHECK(sub.dist_u[i] >= 0);
      CHECK(sub.dist_v[i] >= 0);
    }
  }

  SUBCASE("split query pair with nothing to route through gets a direct link") {
    SubgraphDraft draft;
    draft.u = 0;
    draft.v = 1;
    draft.objects = {0, 1};
    draft.links = {};
    CHECK(repair_isolated(draft, 9) == 1);
    CHECK(draft.links[0].src == 0);
    CHECK(draft.links[0].dst == 1);
  }
}

TEST_CASE("generate_subgraphs: counts, clamping, rank ordering, determinism") {
  GeneratorConfig gcfg;
  gcfg.n_graphs = 1;
  gcfg.objects_per_graph = 60;
  gcfg.pairs_per_relation = 8;
  gcfg.noise_edges_fraction = 0.1;
  GraphCorpus corpus = generate_corpus(gcfg);
  const HeterogeneousGraph& g = corpus.graphs[0];
  EmbedParams ep;
  ep.dim = 8;
  EmbeddingTable emb = pretrain_embeddings(g, ep);
  auto [u, v] = g.relations.begin()->second.front();

  SUBCASE("paper-shaped settings give N_subg = 100") {
    ExtractionParams p;
    p.k_path = 30;
    p.l_max = 4;
    p.n_type_min = 2;
    p.n_type_max = 6;
    p.m = 20;
    CHECK(p.n_subgraphs() == 100);
    GraphStructure s = extract_structure(g, u, v, p);
    SubgraphSet set = generate_subgraphs(g, s, emb, p);
    CHECK(set.subgraphs.size() == 100);
    for (const NormalizedSubgraph& sub : set.subgraphs) {
      // both query objects present, everything reaches them
      CHECK(std::count(sub.objects.begin(), sub.objects.end(), u) == 1);
      CHECK(std::count(sub.objects.begin(), sub.objects.end(), v) == 1);
      for (size_t i = 0; i < sub.objects.size(); ++i) {
        CHECK(sub.dist_u[i] >= 0);
        CHECK(sub.dist_v[i] >= 0);
      }
      // rank slots ordered by summed similarity to the query types
      std::vector<double> score;
      for (int t : sub.selected_types) {
        score.push_back(type_similarity(g, s, emb, t, g.object_type(u)) +
                        type_similarity(g, s, emb, t, g.object_type(v)));
      }
      for (size_t k = 1; k < score.size(); ++k) CHECK(score[k - 1] >= score[k] - 1e-12);
      // query types always selected
      CHECK(std::count(sub.selected_types.begin(), sub.selected_types.end(),
                       g.object_type(u)) == 1);
      CHECK(std::count(sub.selected_types.begin(), sub.selected_types.end(),
                       g.object_type(v)) == 1);
    }
  }

  SUBCASE("a 2-type structure reproduces itself modulo repair") {
    // craft a 2-type graph so every draw clamps to both types
    HeterogeneousGraph g2 = test::make_graph(2, 1, {0, 1, 0}, {{0, 1, 0}, {1, 2, 0}});
    EmbeddingTable e2 = pretrain_embeddings(g2, ep);
    ExtractionParams p = desk_params();
    GraphStructure s2 = extract_structure(g2, 0, 2, p);
    SubgraphSet set = generate_subgraphs(g2, s2, e2, p);
    CHECK(int(set.subgraphs.size()) == p.n_subgraphs());
    for (const NormalizedSubgraph& sub : set.subgraphs) {
      CHECK(sub.objects == s2.objects);
      CHECK(sub.synthetic_link_count() == 0);
      CHECK(sub.n_types() == 2);
    }
  }

  SUBCASE("fixed seed reruns identically") {
    ExtractionParams p = desk_params();
    GraphStructure s = extract_structure(g, u, v, p);
    SubgraphSet a = generate_subgraphs(g, s, emb, p);
    SubgraphSet b = generate_subgraphs(g, s, emb, p);
    REQUIRE(a.subgraphs.size() == b.subgraphs.size());
    for (size_t i = 0; i < a.subgraphs.size(); ++i) {
      CHECK(a.subgraphs[i].objects == b.subgraphs[i].objects);
      CHECK(a.subgraphs[i].selected_types == b.subgraphs[i].selected_types);
      CHECK(a.subgraphs[i].slot == b.subgraphs[i].slot);
    }
  }
}

TEST_CASE("extraction cache: build, save, load, key validation") {
  GeneratorConfig gcfg;
  gcfg.n_graphs = 2;
  gcfg.objects_per_graph = 60;
  gcfg.pairs_per_relation = 6;
  GraphCorpus corpus = generate_corpus(gcfg);
  EmbedParams ep;
  ep.dim = 8;
  EmbeddingCache emb = compute_embeddings(corpus, ep);
  ExtractionParams p = desk_params();

  ExtractionCache cache = ExtractionCache::build(corpus, emb, p, 2);
  CHECK(cache.size() > 0);
  cache.save("episode_cache.bin");
  ExtractionCache back =
      ExtractionCache::load("episode_cache.bin", corpus_content_hash(corpus), p.fingerprint());
  CHECK(back.size() == cache.size());
  CHECK_THROWS_AS(ExtractionCache::load("episode_cache.bin", 123, p.fingerprint()),
                  ValidationError);
  CHECK_THROWS_AS(ExtractionCache::load("episode_cache.bin", corpus_content_hash(corpus), "x"),
                  ValidationError);

  // parallel build equals serial build
  ExtractionCache serial = ExtractionCache::build(corpus, emb, p, 1);
  serial.save("episode_cache_serial.bin");
  std::ifstream f1("episode_cache.bin", std::ios::binary);
  std::ifstream f2("episode_cache_serial.bin", std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  CHECK(b1.str() == b2.str());
}

TEST_CASE("episode sampler: shapes, disjointness, determinism, insufficiency") {
  GeneratorConfig gcfg;
  gcfg.n_graphs = 1;
  gcfg.objects_per_graph = 80;
  gcfg.n_relations_per_graph = 3;
  gcfg.pairs_per_relation = 12;
  GraphCorpus corpus = generate_corpus(gcfg);
  EmbedParams ep;
  ep.dim = 8;
  EmbeddingCache emb = compute_embeddings(corpus, ep);
  ExtractionParams p = desk_params();
  ExtractionCache cache = ExtractionCache::build(corpus, emb, p);

  SplitSpec split;
  std::vector<std::string> names;
  for (const auto& [name, pairs] : corpus.graphs[0].relations) names.push_back(name);
  split.graphs.push_back({corpus.graphs[0].id, names});

  SUBCASE("N_rel=2, K_spt=1, K_qry=10 gives |support|=2, |query|=20") {
    EpisodeSampler sampler(corpus, cache, split, 2, 1, 10, 5);
    EpisodeTask task = sampler.episode(0);
    CHECK(task.support.size() == 2);
    CHECK(task.query.size() == 20);
    CHECK(task.relation_names.size() == 2);
  }

  SUBCASE("support and query pairs are disjoint") {
    EpisodeSampler sampler(corpus, cache, split, 3, 1, 10, 5);
    for (int e = 0; e < 5; ++e) {
      EpisodeTask task = sampler.episode(e);
      std::set<std::pair<int, int>> support_pairs;
      for (const auto& [set, r] : task.support) support_pairs.insert({set->u, set->v});
      for (const auto& [set, r] : task.query) {
        CHECK(!support_pairs.count({set->u, set->v}));
      }
      // every relation index appears exactly K_spt / K_qry times
      std::vector<int> spt_counts(3, 0), qry_counts(3, 0);
      for (const auto& [set, r] : task.support) spt_counts[size_t(r)] += 1;
      for (const auto& [set, r] : task.query) qry_counts[size_t(r)] += 1;
      CHECK(spt_counts == std::vector<int>{1, 1, 1});
      CHECK(qry_counts == std::vector<int>{10, 10, 10});
    }
  }

  SUBCASE("asking for more relations than the graph has is InsufficientData") {
    CHECK_THROWS_WITH_AS(EpisodeSampler(corpus, cache, split, 5, 1, 10, 5),
                         doctest::Contains("g0"), InsufficientDataError);
  }

  SUBCASE("too few extractable pairs is InsufficientData naming the relation") {
    CHECK_THROWS_AS(EpisodeSampler(corpus, cache, split, 3, 5, 10, 5), InsufficientDataError);
  }

  SUBCASE("fixed seed reproduces the episode stream") {
    EpisodeSampler a(corpus, cache, split, 2, 3, 5, 17);
    EpisodeSampler b(corpus, cache, split, 2, 3, 5, 17);
    for (int e = 0; e < 8; ++e) {
      EpisodeTask ta = a.episode(e);
      EpisodeTask tb = b.episode(e);
      CHECK(ta.relation_names == tb.relation_names);
      REQUIRE(ta.support.size() == tb.support.size());
      for (size_t i = 0; i < ta.support.size(); ++i) {
        CHECK(ta.support[i].first == tb.support[i].first);  // same cached set
        CHECK(ta.support[i].second == tb.support[i].second);
      }
    }
  }
}
