#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metags/embedding.hpp"
#include "metags/errors.hpp"
#include "metags/synthgen.hpp"
#include "test_support.hpp"

using namespace metags;

namespace {

double vec_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// 4-cycle 0-1-2-3-0 with alternating types so the antipodal rotation
// i -> (i+2) mod 4 is a type-preserving automorphism.
HeterogeneousGraph four_cycle() {
  return test::make_graph(2, 1, {0, 1, 0, 1},
                          {{0, 1, 0}, {1, 2, 0}, {2, 3, 0}, {3, 0, 0}});
}

}  // namespace

TEST_CASE("antipodal automorphism of a 4-cycle maps to equal vectors") {
  HeterogeneousGraph g = four_cycle();
  EmbedParams params;
  params.seed = 5;
  for (int dim : {2, 4}) {
    params.dim = dim;
    EmbeddingTable t = pretrain_embeddings(g, params);
    // oracle: the explicit automorphism pi(i) = (i+2) mod 4
    CHECK(vec_dist(t.vec(0), t.vec(2)) < 1e-9);
    CHECK(vec_dist(t.vec(1), t.vec(3)) < 1e-9);
  }
}

TEST_CASE("single-object graph embeds to the zero vector") {
  HeterogeneousGraph g = test::make_graph(3, 0, {0}, {});
  EmbedParams params;
  params.dim = 4;
  EmbeddingTable t = pretrain_embeddings(g, params);
  CHECK(t.vec(0) == std::vector<double>{0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("fixed seed reproduces identical tables") {
  HeterogeneousGraph g = test::random_graph(3, 30, 3, 2, 0.1);
  EmbedParams params;
  params.dim = 8;
  params.seed = 42;
  EmbeddingTable a = pretrain_embeddings(g, params);
  EmbeddingTable b = pretrain_embeddings(g, params);
  REQUIRE(a.vectors.size() == b.vectors.size());
  for (size_t i = 0; i < a.vectors.size(); ++i) CHECK(a.vectors[i] == b.vectors[i]);
}

TEST_CASE("independent of object insertion order in the file") {
  // same graph, object records listed in different orders
  std::string doc_a = R"({"graphs":[{"id":"g","object_types":["x","y"],"link_types":["l"],
    "objects":[{"id":0,"type":0,"feature":[]},{"id":1,"type":1,"feature":[]},{"id":2,"type":0,"feature":[]}],
    "links":[[0,1,0],[1,2,0]],"relations":{"r":[[0,2]]}}],
    "split":{"train":["g"],"val":[],"test":[]}})";
  std::string doc_b = R"({"graphs":[{"id":"g","object_types":["x","y"],"link_types":["l"],
    "objects":[{"id":2,"type":0,"feature":[]},{"id":0,"type":0,"feature":[]},{"id":1,"type":1,"feature":[]}],
    "links":[[1,2,0],[0,1,0]],"relations":{"r":[[0,2]]}}],
    "split":{"train":["g"],"val":[],"test":[]}})";
  EmbedParams params;
  params.dim = 4;
  EmbeddingTable a = pretrain_embeddings(corpus_from_json(doc_a, "a").graphs[0], params);
  EmbeddingTable b = pretrain_embeddings(corpus_from_json(doc_b, "b").graphs[0], params);
  for (size_t i = 0; i < a.vectors.size(); ++i) CHECK(a.vectors[i] == b.vectors[i]);
}

TEST_CASE("dim beyond the spectrum pads trailing zero columns") {
  // a single link has co-occurrence rank <= 2
  HeterogeneousGraph g = test::make_graph(2, 1, {0, 1}, {{0, 1, 0}});
  EmbedParams params;
  params.dim = 6;
  EmbeddingTable t = pretrain_embeddings(g, params);
  bool tail_zero = true;
  for (int i = 0; i < 2; ++i) {
    for (int k = 2; k < 6; ++k) tail_zero = tail_zero && t.vec(i)[size_t(k)] == 0.0;
  }
  CHECK(tail_zero);
}

TEST_CASE("dim < 2 is rejected") {
  HeterogeneousGraph g = four_cycle();
  EmbedParams params;
  params.dim = 1;
  CHECK_THROWS_AS(pretrain_embeddings(g, params), ConfigError);
}

TEST_CASE("embedding cache round trip and key validation") {
  GeneratorConfig cfg;
  cfg.n_graphs = 2;
  cfg.objects_per_graph = 40;
  cfg.pairs_per_relation = 5;
  cfg.n_relations_per_graph = 2;
  GraphCorpus corpus = generate_corpus(cfg);
  EmbedParams params;
  params.dim = 8;
  EmbeddingCache cache = compute_embeddings(corpus, params);
  save_embedding_cache(cache, "emb_cache.bin");
  EmbeddingCache back = load_embedding_cache("emb_cache.bin");
  CHECK(back.params_fingerprint == params.fingerprint());
  for (const auto& [gid, table] : cache.tables) {
    const EmbeddingTable& bt = back.table(gid);
    REQUIRE(bt.vectors.size() == table.vectors.size());
    for (size_t i = 0; i < table.vectors.size(); ++i) CHECK(bt.vectors[i] == table.vectors[i]);
  }
  CHECK_THROWS_AS(back.table("nope"), ValidationError);
  CHECK_THROWS_AS(load_embedding_cache("missing_file.bin"), IoError);
}
