#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "metags/errors.hpp"
#include "metags/extract.hpp"
#include "metags/synthgen.hpp"

using namespace metags;

namespace {

GeneratorConfig small_cfg() {
  GeneratorConfig cfg;
  cfg.seed = 11;
  cfg.n_graphs = 2;
  cfg.objects_per_graph = 60;
  cfg.n_object_types = 4;
  cfg.n_link_types = 3;
  cfg.n_relations_per_graph = 3;
  cfg.pairs_per_relation = 8;
  cfg.motif_catalog_size = 6;
  cfg.feature_dim = 4;
  cfg.noise_edges_fraction = 0.0;
  cfg.heldout_pairs_per_relation = 3;
  return cfg;
}

// Brute-force motif detector: checks whether every motif of a relation has
// an instance between (u, v), with u as the pair's first endpoint. Used as
// the recoverability oracle.
bool motif_present(const HeterogeneousGraph& g, const MotifTemplate& m, int u, int v) {
  auto has_link = [&](int a, int b, int t) {
    const auto& nbrs = g.neighbors(a);
    return std::count(nbrs.begin(), nbrs.end(), std::pair<int, int>{b, t}) > 0;
  };
  auto wedge = [&](int type_id, int l1, int l2) {
    for (int x = 0; x < g.n_objects(); ++x) {
      if (x == u || x == v || g.object_type(x) != type_id) continue;
      if (has_link(u, x, l1) && has_link(x, v, l2)) return true;
    }
    return false;
  };
  switch (m.shape) {
    case MotifShape::Wedge:
      return wedge(m.object_type_ids[0], m.link_type_ids[0], m.link_type_ids[1]);
    case MotifShape::DoubleWedge:
      return wedge(m.object_type_ids[0], m.link_type_ids[0], m.link_type_ids[1]) &&
             wedge(m.object_type_ids[1], m.link_type_ids[2], m.link_type_ids[3]);
    case MotifShape::Chain3: {
      for (int a = 0; a < g.n_objects(); ++a) {
        if (a == u || a == v || g.object_type(a) != m.object_type_ids[0]) continue;
        if (!has_link(u, a, m.link_type_ids[0])) continue;
        for (int b = 0; b < g.n_objects(); ++b) {
          if (b == u || b == v || b == a || g.object_type(b) != m.object_type_ids[1]) continue;
          if (has_link(a, b, m.link_type_ids[1]) && has_link(b, v, m.link_type_ids[2])) {
            return true;
          }
        }
      }
      return false;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("same config and seed produce byte-identical corpora") {
  GeneratorConfig cfg = small_cfg();
  CHECK(corpus_to_json(generate_corpus(cfg)) == corpus_to_json(generate_corpus(cfg)));
}

TEST_CASE("distinct seeds differ in at least one link") {
  GeneratorConfig a = small_cfg();
  GeneratorConfig b = small_cfg();
  b.seed = 12;
  std::multiset<Link> links_a, links_b;
  for (const auto& g : generate_corpus(a).graphs) links_a.insert(g.links.begin(), g.links.end());
  for (const auto& g : generate_corpus(b).graphs) links_b.insert(g.links.begin(), g.links.end());
  CHECK(links_a != links_b);
}

TEST_CASE("motif instantiation: object/link counts per shape") {
  std::vector<MotifTemplate> catalog = {
      {MotifShape::Wedge, {1}, {0, 1}},
      {MotifShape::DoubleWedge, {1, 2}, {0, 1, 0, 1}},
      {MotifShape::Chain3, {1, 2}, {0, 1, 0}},
  };
  GraphBuilder b("t", catalog, 3, 2);
  int u = b.add_object(0);
  int v = b.add_object(0);

  auto wedge = b.instantiate_motif(0, u, v, 0);
  CHECK(wedge.new_objects.size() == 1);
  CHECK(wedge.new_links.size() == 2);

  auto dw = b.instantiate_motif(1, u, v, 0);
  CHECK(dw.new_objects.size() == 2);
  CHECK(dw.new_links.size() == 4);

  auto chain = b.instantiate_motif(2, u, v, 0);
  CHECK(chain.new_objects.size() == 2);
  CHECK(chain.new_links.size() == 3);

  SUBCASE("idempotent per (motif, pair)") {
    int before_objects = b.n_objects();
    int before_links = b.n_links();
    auto again = b.instantiate_motif(0, u, v, 0);
    CHECK(again.new_objects.empty());
    CHECK(again.new_links.empty());
    CHECK(b.n_objects() == before_objects);
    CHECK(b.n_links() == before_links);
  }
}

TEST_CASE("default config yields a corpus passing every graph invariant") {
  GraphCorpus corpus = generate_corpus(GeneratorConfig{});
  corpus.validate();
  CHECK(corpus.graphs.size() == 6);
  // finalize() already ran inside the generator; a save/load round trip
  // re-validates everything from scratch
  GraphCorpus back = corpus_from_json(corpus_to_json(corpus), "generated");
  CHECK(back.graphs.size() == corpus.graphs.size());
  CHECK(!corpus.train_ids.empty());
  CHECK(!corpus.test_ids.empty());
}

TEST_CASE("planted pairs are connected within 4 hops") {
  GenerationTrace trace;
  GraphCorpus corpus = generate_corpus(small_cfg(), &trace);
  for (size_t gi = 0; gi < corpus.graphs.size(); ++gi) {
    for (const PlantedRelation& rel : trace.graphs[gi].relations) {
      for (const auto& [u, v] : rel.positive_pairs) {
        auto d = shortest_distance(corpus.graphs[gi], u, v);
        REQUIRE(d.has_value());
        CHECK(*d <= 4);
      }
    }
  }
}

TEST_CASE("with zero noise, paths between planted pairs traverse only motif links") {
  GenerationTrace trace;
  GraphCorpus corpus = generate_corpus(small_cfg(), &trace);
  const HeterogeneousGraph& g = corpus.graphs[0];
  const GraphTrace& gt = trace.graphs[0];
  int checked = 0;
  for (const PlantedRelation& rel : gt.relations) {
    for (const auto& [u, v] : rel.positive_pairs) {
      for (const ScoredPath& p : enumerate_paths(g, u, v, 6, 10000)) {
        for (size_t i = 1; i < p.objects.size(); ++i) {
          int a = std::min(p.objects[i - 1], p.objects[i]);
          int b = std::max(p.objects[i - 1], p.objects[i]);
          bool motif_tagged = false;
          for (const auto& [link, tag] : gt.link_tags) {
            if (link.src == a && link.dst == b && tag.provenance == LinkProvenance::Motif) {
              motif_tagged = true;
              break;
            }
          }
          CHECK(motif_tagged);
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("relation recoverability: motif detector labels held-out pairs >= 0.95") {
  GenerationTrace trace;
  GraphCorpus corpus = generate_corpus(small_cfg(), &trace);
  int correct = 0, total = 0;
  for (size_t gi = 0; gi < corpus.graphs.size(); ++gi) {
    const HeterogeneousGraph& g = corpus.graphs[gi];
    const std::vector<PlantedRelation>& rels = trace.graphs[gi].relations;
    for (size_t true_r = 0; true_r < rels.size(); ++true_r) {
      for (const auto& [u, v] : rels[true_r].heldout_pairs) {
        // predict the relation with the most fully-matched motifs
        int best = -1, best_matched = -1;
        for (size_t r = 0; r < rels.size(); ++r) {
          int matched = 0;
          bool all = true;
          for (int mid : rels[r].motif_ids) {
            if (motif_present(g, trace.catalog[size_t(mid)], u, v)) {
              ++matched;
            } else {
              all = false;
            }
          }
          if (all && matched > best_matched) {
            best_matched = matched;
            best = int(r);
          }
        }
        correct += best == int(true_r) ? 1 : 0;
        ++total;
      }
    }
  }
  REQUIRE(total >= 18);
  CHECK(double(correct) / double(total) >= 0.95);
}

TEST_CASE("positive pairs realize every motif of their relation") {
  GenerationTrace trace;
  GraphCorpus corpus = generate_corpus(small_cfg(), &trace);
  const HeterogeneousGraph& g = corpus.graphs[1];
  for (const PlantedRelation& rel : trace.graphs[1].relations) {
    for (const auto& [u, v] : rel.positive_pairs) {
      for (int mid : rel.motif_ids) {
        CHECK(motif_present(g, trace.catalog[size_t(mid)], u, v));
      }
    }
  }
}

TEST_CASE("infeasible configurations are rejected") {
  GeneratorConfig cfg = small_cfg();
  cfg.objects_per_graph = 10;  // 2*3*8 = 48 anchors needed
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);

  GeneratorConfig bad_types = small_cfg();
  bad_types.n_object_types = 2;
  CHECK_THROWS_AS(generate_corpus(bad_types), ConfigError);

  GeneratorConfig bad_noise = small_cfg();
  bad_noise.noise_edges_fraction = 1.5;
  CHECK_THROWS_AS(generate_corpus(bad_noise), ConfigError);
}

TEST_CASE("fresh vocabularies per graph; shared when requested") {
  GeneratorConfig cfg = small_cfg();
  GraphCorpus fresh = generate_corpus(cfg);
  std::set<std::string> a(fresh.graphs[0].object_types.begin(), fresh.graphs[0].object_types.end());
  for (const std::string& t : fresh.graphs[1].object_types) CHECK(!a.count(t));

  cfg.shared_vocabulary = true;
  GraphCorpus shared = generate_corpus(cfg);
  CHECK(shared.graphs[0].object_types == shared.graphs[1].object_types);
  CHECK(shared.graphs[0].link_types == shared.graphs[1].link_types);
}

TEST_CASE("noise fraction adds provenance-tagged noise links") {
  GeneratorConfig cfg = small_cfg();
  cfg.noise_edges_fraction = 0.2;
  GenerationTrace trace;
  generate_corpus(cfg, &trace);
  int noise = 0, motif = 0;
  for (const auto& [link, tag] : trace.graphs[0].link_tags) {
    (tag.provenance == LinkProvenance::Noise ? noise : motif) += 1;
  }
  CHECK(noise > 0);
  CHECK(noise <= int(0.25 * motif) + 2);
}
