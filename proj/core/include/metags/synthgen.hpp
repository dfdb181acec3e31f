#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metags/graph.hpp"
#include "metags/rng.hpp"

namespace metags {

struct GeneratorConfig {
  uint64_t seed = 7;
  int n_graphs = 6;
  int objects_per_graph = 120;
  int n_object_types = 5;  // >= 3
  int n_link_types = 3;
  int n_relations_per_graph = 3;
  int pairs_per_relation = 20;
  int motif_catalog_size = 6;
  int feature_dim = 8;
  double noise_edges_fraction = 0.1;
  // Extra labeled pairs per relation that are planted in the graph but not
  // exported as relation labels; they back the recoverability checks.
  int heldout_pairs_per_relation = 2;
  // One type vocabulary for the whole corpus instead of a fresh one per
  // graph (single-heterogeneity corpora).
  bool shared_vocabulary = false;

  void validate() const;
};

enum class MotifShape { Wedge, DoubleWedge, Chain3 };

// Typed subgraph template connecting an anchor pair through fresh
// intermediate objects. Wedge: u-m-v. DoubleWedge: two parallel wedges.
// Chain3: u-a-b-v.
struct MotifTemplate {
  MotifShape shape = MotifShape::Wedge;
  std::vector<int> object_type_ids;  // intermediate object types
  std::vector<int> link_type_ids;

  int n_new_objects() const { return shape == MotifShape::Wedge ? 1 : 2; }
  int n_new_links() const {
    switch (shape) {
      case MotifShape::Wedge: return 2;
      case MotifShape::DoubleWedge: return 4;
      case MotifShape::Chain3: return 3;
    }
    return 0;
  }
};

struct PlantedRelation {
  std::string name;
  std::vector<int> motif_ids;  // composed in parallel
  std::vector<ObjectPair> positive_pairs;
  std::vector<ObjectPair> heldout_pairs;
};

enum class LinkProvenance { Motif, Noise };

struct LinkTag {
  LinkProvenance provenance = LinkProvenance::Motif;
  int relation_index = -1;  // -1 for noise
  int motif_id = -1;
};

struct GraphTrace {
  std::vector<PlantedRelation> relations;
  std::map<Link, LinkTag> link_tags;  // canonical links
};

struct GenerationTrace {
  std::vector<MotifTemplate> catalog;
  std::vector<GraphTrace> graphs;  // parallel to corpus.graphs
};

// Incremental construction of one synthetic graph. Exposed so tests can
// drive motif instantiation directly.
class GraphBuilder {
 public:
  GraphBuilder(std::string graph_id, const std::vector<MotifTemplate>& catalog,
               int n_object_types, int n_link_types);

  // Appends a fresh object of the given type, returns its id.
  int add_object(int type_id);

  struct MotifInstance {
    std::vector<int> new_objects;
    std::vector<Link> new_links;
  };
  // Connects (u, v) through the motif's template. Idempotent per
  // (motif_id, u, v): a repeated call adds nothing and returns empty sets.
  MotifInstance instantiate_motif(int motif_id, int u, int v, int relation_index);

  // Adds `count` random typed links between existing objects, skipping
  // self-loops and triples that already exist.
  void add_noise_links(int count, Rng& rng);

  int n_objects() const { return int(objects_.size()); }
  int n_links() const { return int(links_.size()); }
  const std::map<Link, LinkTag>& link_tags() const { return tags_; }

  // Moves the accumulated structure into a graph (types/features/relations
  // are filled by the caller before finalize()).
  HeterogeneousGraph take_graph();

 private:
  void add_link(int a, int b, int type_id, const LinkTag& tag);

  std::string graph_id_;
  const std::vector<MotifTemplate>& catalog_;
  int n_object_types_;
  int n_link_types_;
  std::vector<int> objects_;  // type id per object
  std::vector<Link> links_;
  std::map<Link, LinkTag> tags_;
  std::map<std::tuple<int, int, int>, bool> instantiated_;  // (motif,u,v)
};

// Deterministic corpus with planted composite relations: each relation is a
// parallel union of 2-3 motifs, every positive pair realizes every motif of
// its relation. Per-graph type vocabularies are fresh unless
// cfg.shared_vocabulary is set.
GraphCorpus generate_corpus(const GeneratorConfig& cfg);
GraphCorpus generate_corpus(const GeneratorConfig& cfg, GenerationTrace* trace);

}  // namespace metags
