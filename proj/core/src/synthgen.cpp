#include "metags/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "metags/errors.hpp"

namespace metags {

namespace {

constexpr uint64_t kCatalogKey = 0x6361746c67ull;   // stream tags
constexpr uint64_t kGraphKey = 0x677261706855ull;
constexpr uint64_t kFeatKey = 0x66656174ull;
constexpr uint64_t kNoiseKey = 0x6e6f697365ull;
constexpr uint64_t kSplitKey = 0x73706c6974ull;

}  // namespace

void GeneratorConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string("generator: ") + name + " must be >= 1");
  };
  positive(n_graphs, "n_graphs");
  positive(objects_per_graph, "objects_per_graph");
  positive(n_object_types, "n_object_types");
  positive(n_link_types, "n_link_types");
  positive(n_relations_per_graph, "n_relations_per_graph");
  positive(pairs_per_relation, "pairs_per_relation");
  positive(motif_catalog_size, "motif_catalog_size");
  positive(feature_dim, "feature_dim");
  if (n_object_types < 3) {
    throw ConfigError("generator: n_object_types must be >= 3");
  }
  if (heldout_pairs_per_relation < 0) {
    throw ConfigError("generator: heldout_pairs_per_relation must be >= 0");
  }
  if (noise_edges_fraction < 0.0 || noise_edges_fraction > 1.0) {
    throw ConfigError("generator: noise_edges_fraction must lie in [0,1]");
  }
  if (2 * n_relations_per_graph * pairs_per_relation > objects_per_graph) {
    throw ConfigError(
        "generator: infeasible configuration: 2 * n_relations_per_graph * "
        "pairs_per_relation exceeds objects_per_graph");
  }
  if (motif_catalog_size < 3) {
    throw ConfigError("generator: infeasible configuration: motif catalog needs >= 3 entries");
  }
}

GraphBuilder::GraphBuilder(std::string graph_id, const std::vector<MotifTemplate>& catalog,
                           int n_object_types, int n_link_types)
    : graph_id_(std::move(graph_id)),
      catalog_(catalog),
      n_object_types_(n_object_types),
      n_link_types_(n_link_types) {}

int GraphBuilder::add_object(int type_id) {
  objects_.push_back(type_id);
  return int(objects_.size()) - 1;
}

void GraphBuilder::add_link(int a, int b, int type_id, const LinkTag& tag) {
  Link canon{std::min(a, b), std::max(a, b), type_id};
  if (tags_.count(canon)) return;
  links_.push_back(canon);
  tags_[canon] = tag;
}

GraphBuilder::MotifInstance GraphBuilder::instantiate_motif(int motif_id, int u, int v,
                                                            int relation_index) {
  if (motif_id < 0 || motif_id >= int(catalog_.size())) {
    throw ConfigError("generator: unknown motif id " + std::to_string(motif_id));
  }
  auto key = std::make_tuple(motif_id, std::min(u, v), std::max(u, v));
  if (instantiated_.count(key)) return {};
  instantiated_[key] = true;

  const MotifTemplate& m = catalog_[size_t(motif_id)];
  LinkTag tag{LinkProvenance::Motif, relation_index, motif_id};
  MotifInstance out;
  size_t before = links_.size();
  switch (m.shape) {
    case MotifShape::Wedge: {
      int mid = add_object(m.object_type_ids[0]);
      out.new_objects = {mid};
      add_link(u, mid, m.link_type_ids[0], tag);
      add_link(mid, v, m.link_type_ids[1], tag);
      break;
    }
    case MotifShape::DoubleWedge: {
      int m1 = add_object(m.object_type_ids[0]);
      int m2 = add_object(m.object_type_ids[1]);
      out.new_objects = {m1, m2};
      add_link(u, m1, m.link_type_ids[0], tag);
      add_link(m1, v, m.link_type_ids[1], tag);
      add_link(u, m2, m.link_type_ids[2], tag);
      add_link(m2, v, m.link_type_ids[3], tag);
      break;
    }
    case MotifShape::Chain3: {
      int a = add_object(m.object_type_ids[0]);
      int b = add_object(m.object_type_ids[1]);
      out.new_objects = {a, b};
      add_link(u, a, m.link_type_ids[0], tag);
      add_link(a, b, m.link_type_ids[1], tag);
      add_link(b, v, m.link_type_ids[2], tag);
      break;
    }
  }
  out.new_links.assign(links_.begin() + long(before), links_.end());
  return out;
}

void GraphBuilder::add_noise_links(int count, Rng& rng) {
  int added = 0;
  int attempts = 0;
  const int max_attempts = count * 50 + 100;
  while (added < count && attempts < max_attempts) {
    ++attempts;
    int a = int(rng.next_below(uint64_t(objects_.size())));
    int b = int(rng.next_below(uint64_t(objects_.size())));
    if (a == b) continue;
    int t = int(rng.next_below(uint64_t(n_link_types_)));
    Link canon{std::min(a, b), std::max(a, b), t};
    if (tags_.count(canon)) continue;
    add_link(a, b, t, LinkTag{LinkProvenance::Noise, -1, -1});
    ++added;
  }
}

HeterogeneousGraph GraphBuilder::take_graph() {
  HeterogeneousGraph g;
  g.id = graph_id_;
  for (size_t i = 0; i < objects_.size(); ++i) {
    ObjectRecord o;
    o.id = int(i);
    o.type_id = objects_[i];
    g.objects.push_back(std::move(o));
  }
  g.links = links_;
  return g;
}

namespace {

std::vector<MotifTemplate> build_catalog(const GeneratorConfig& cfg) {
  std::vector<MotifTemplate> catalog;
  auto same = [](const MotifTemplate& a, const MotifTemplate& b) {
    return a.shape == b.shape && a.object_type_ids == b.object_type_ids &&
           a.link_type_ids == b.link_type_ids;
  };
  for (int k = 0; k < cfg.motif_catalog_size; ++k) {
    Rng rng = Rng::derive(cfg.seed, {kCatalogKey, uint64_t(k)});
    // Duplicate templates would make planted relations indistinguishable;
    // redraw types until this entry is unique (shape cycles regardless).
    for (int attempt = 0; attempt < 1000; ++attempt) {
      MotifTemplate m;
      m.shape = MotifShape(k % 3);
      int n_obj = m.shape == MotifShape::Wedge ? 1 : 2;
      int n_lk = m.shape == MotifShape::Wedge ? 2 : (m.shape == MotifShape::DoubleWedge ? 4 : 3);
      for (int i = 0; i < n_obj; ++i) {
        m.object_type_ids.push_back(int(rng.next_below(uint64_t(cfg.n_object_types))));
      }
      for (int i = 0; i < n_lk; ++i) {
        m.link_type_ids.push_back(int(rng.next_below(uint64_t(cfg.n_link_types))));
      }
      bool duplicate = false;
      for (const MotifTemplate& other : catalog) duplicate = duplicate || same(m, other);
      if (!duplicate) {
        catalog.push_back(std::move(m));
        break;
      }
    }
    if (int(catalog.size()) != k + 1) {
      throw ConfigError(
          "generator: infeasible configuration: type vocabulary too small for a distinct "
          "motif catalog of size " + std::to_string(cfg.motif_catalog_size));
    }
  }
  return catalog;
}

// Distinct, pairwise non-nested motif-id sets, one per relation. Non-nesting
// keeps relations distinguishable by the motifs they realize.
std::vector<std::vector<int>> assign_motif_sets(const GeneratorConfig& cfg, Rng& rng) {
  std::vector<std::vector<int>> sets;
  std::set<std::set<int>> chosen;
  for (int r = 0; r < cfg.n_relations_per_graph; ++r) {
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      int size = 2 + int(rng.next_below(2));
      size = std::min(size, cfg.motif_catalog_size);
      std::set<int> candidate;
      while (int(candidate.size()) < size) {
        candidate.insert(int(rng.next_below(uint64_t(cfg.motif_catalog_size))));
      }
      bool nested = false;
      for (const std::set<int>& other : chosen) {
        bool cand_in_other = std::includes(other.begin(), other.end(), candidate.begin(),
                                           candidate.end());
        bool other_in_cand = std::includes(candidate.begin(), candidate.end(), other.begin(),
                                           other.end());
        if (cand_in_other || other_in_cand) {
          nested = true;
          break;
        }
      }
      if (nested) continue;
      chosen.insert(candidate);
      sets.emplace_back(candidate.begin(), candidate.end());
      ok = true;
    }
    if (!ok) {
      throw ConfigError(
          "generator: infeasible configuration: cannot draw distinct motif sets for all "
          "relations; enlarge motif_catalog_size");
    }
  }
  return sets;
}

std::vector<double> object_feature(const GeneratorConfig& cfg,
                                   const std::vector<std::vector<double>>& centers, int type_id,
                                   Rng& rng) {
  std::vector<double> x = centers[size_t(type_id)];
  for (double& v : x) v += 0.1 * rng.next_normal();
  return x;
}

}  // namespace

GraphCorpus generate_corpus(const GeneratorConfig& cfg) {
  return generate_corpus(cfg, nullptr);
}

GraphCorpus generate_corpus(const GeneratorConfig& cfg, GenerationTrace* trace) {
  cfg.validate();
  std::vector<MotifTemplate> catalog = build_catalog(cfg);
  if (trace) {
    trace->catalog = catalog;
    trace->graphs.clear();
  }

  GraphCorpus corpus;
  for (int gi = 0; gi < cfg.n_graphs; ++gi) {
    Rng rng = Rng::derive(cfg.seed, {kGraphKey, uint64_t(gi)});
    std::string gid = "g" + std::to_string(gi);

    GraphBuilder builder(gid, catalog, cfg.n_object_types, cfg.n_link_types);
    for (int i = 0; i < cfg.objects_per_graph; ++i) {
      builder.add_object(int(rng.next_below(uint64_t(cfg.n_object_types))));
    }

    std::vector<std::vector<int>> motif_sets = assign_motif_sets(cfg, rng);

    // Disjoint anchor pools: every labeled pair owns its two endpoints.
    std::vector<int> pool(size_t(cfg.objects_per_graph));
    for (int i = 0; i < cfg.objects_per_graph; ++i) pool[size_t(i)] = i;
    rng.shuffle(pool);
    size_t cursor = 0;

    GraphTrace gtrace;
    for (int r = 0; r < cfg.n_relations_per_graph; ++r) {
      PlantedRelation rel;
      rel.name = gid + ":rel" + std::to_string(r);
      rel.motif_ids = motif_sets[size_t(r)];
      for (int p = 0; p < cfg.pairs_per_relation; ++p) {
        int u = pool[cursor++];
        int v = pool[cursor++];
        rel.positive_pairs.push_back({u, v});
        for (int motif_id : rel.motif_ids) builder.instantiate_motif(motif_id, u, v, r);
      }
      // Held-out pairs live on fresh objects so the labeled pool keeps its
      // exact capacity.
      for (int p = 0; p < cfg.heldout_pairs_per_relation; ++p) {
        int u = builder.add_object(int(rng.next_below(uint64_t(cfg.n_object_types))));
        int v = builder.add_object(int(rng.next_below(uint64_t(cfg.n_object_types))));
        rel.heldout_pairs.push_back({u, v});
        for (int motif_id : rel.motif_ids) builder.instantiate_motif(motif_id, u, v, r);
      }
      gtrace.relations.push_back(std::move(rel));
    }

    int motif_links = builder.n_links();
    Rng noise_rng = Rng::derive(cfg.seed, {kNoiseKey, uint64_t(gi)});
    builder.add_noise_links(int(std::lround(cfg.noise_edges_fraction * motif_links)), noise_rng);

    HeterogeneousGraph g = builder.take_graph();
    gtrace.link_tags = builder.link_tags();

    std::string prefix = cfg.shared_vocabulary ? std::string() : gid + ":";
    for (int t = 0; t < cfg.n_object_types; ++t) g.object_types.push_back(prefix + "ot" + std::to_string(t));
    for (int t = 0; t < cfg.n_link_types; ++t) g.link_types.push_back(prefix + "lt" + std::to_string(t));

    std::vector<std::vector<double>> centers;
    for (int t = 0; t < cfg.n_object_types; ++t) {
      Rng crng = Rng::derive(cfg.seed, {kFeatKey, uint64_t(gi), uint64_t(t)});
      std::vector<double> c(size_t(cfg.feature_dim));
      for (double& v : c) v = crng.next_normal();
      centers.push_back(std::move(c));
    }
    for (ObjectRecord& o : g.objects) {
      Rng orng = Rng::derive(cfg.seed, {kFeatKey, uint64_t(gi), 0xffffull, uint64_t(o.id)});
      o.feature = object_feature(cfg, centers, o.type_id, orng);
    }

    for (const PlantedRelation& rel : gtrace.relations) {
      g.relations[rel.name] = rel.positive_pairs;
    }

    g.finalize();
    corpus.graphs.push_back(std::move(g));
    if (trace) trace->graphs.push_back(std::move(gtrace));
  }

  // Split: roughly 1/6 validation and 1/3 test, never starving train.
  int n = cfg.n_graphs;
  int n_test = n >= 2 ? std::max(1, n / 3) : 0;
  int n_val = n >= 3 ? std::max(1, n / 6) : 0;
  int n_train = n - n_test - n_val;
  (void)kSplitKey;
  for (int i = 0; i < n; ++i) {
    const std::string& gid = corpus.graphs[size_t(i)].id;
    if (i < n_train) {
      corpus.train_ids.push_back(gid);
    } else if (i < n_train + n_val) {
      corpus.val_ids.push_back(gid);
    } else {
      corpus.test_ids.push_back(gid);
    }
  }
  corpus.validate();
  return corpus;
}

}  // namespace metags
