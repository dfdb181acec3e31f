#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metags/embedding.hpp"
#include "metags/graph.hpp"

namespace metags {

// Simple path from u to v (object id sequence) with its heterogeneity score.
struct ScoredPath {
  std::vector<int> objects;
  double score = 0.0;
};

// Union of the selected top-scoring paths between a query pair; the raw
// material subgraphs are generated from.
struct GraphStructure {
  std::string graph_id;
  int u = -1;
  int v = -1;
  std::vector<int> objects;  // sorted
  std::vector<Link> links;   // canonical sorted graph links
};

// Subgraph of a GraphStructure induced on a sampled type subset, repaired so
// every object reaches both query objects, with types remapped to similarity
// rank slots 1..N_type (slot 1 = most similar to the query types).
struct NormalizedSubgraph {
  int u = -1;
  int v = -1;
  std::vector<int> objects;  // sorted global ids, always contains u and v

  struct SubLink {
    int src = 0;
    int dst = 0;
    int type_id = 0;
    bool synthetic = false;  // repair link
  };
  std::vector<SubLink> links;

  // selected_types[k-1] is the object type holding rank slot k.
  std::vector<int> selected_types;
  std::vector<int> slot;  // per object (local order): rank of its type

  // Derived at finalize_runtime(): local adjacency and hop distances to the
  // query objects inside this subgraph (finite after repair).
  std::vector<std::vector<int>> local_adj;
  std::vector<int> dist_u;
  std::vector<int> dist_v;

  int n_types() const { return int(selected_types.size()); }
  int local_index(int obj) const;
  int synthetic_link_count() const;
  void finalize_runtime();
};

// All subgraphs extracted for one labeled object pair.
struct SubgraphSet {
  std::string graph_id;
  int u = -1;
  int v = -1;
  std::vector<NormalizedSubgraph> subgraphs;
};

struct ExtractionParams {
  enum class Mode { Paths, TwoHop };
  Mode mode = Mode::Paths;
  int k_path = 500;
  int l_max = 6;
  int path_cap = 50000;  // enumeration budget per pair
  int n_type_min = 2;
  int n_type_max = 6;
  int m = 20;  // draws per N_type setting
  uint64_t seed = 1234;

  int n_subgraphs() const { return m * (n_type_max - n_type_min + 1); }
  std::string fingerprint() const;
  void validate() const;
};

// Eq.-style path score: ln(#distinct object types) * (cross-type links /
// total links). Zero for single-type paths.
double path_score(const HeterogeneousGraph& g, const std::vector<int>& path_objects);

// All simple paths u -> v of at most l_max links, canonical orientation
// (u first), ascending-neighbor DFS order, enumeration capped at `cap`
// completed paths.
std::vector<ScoredPath> enumerate_paths(const HeterogeneousGraph& g, int u, int v, int l_max,
                                        int cap);

// Path mode: union of the top-k_path paths under (score desc, length asc,
// lexicographic ids asc). Throws NoPathError when u,v are disconnected
// within l_max hops. TwoHop mode: induced 2-hop union neighborhood.
GraphStructure extract_structure(const HeterogeneousGraph& g, int u, int v,
                                 const ExtractionParams& params);

// Mean pretrained embedding of the structure's objects of each type.
std::map<int, std::vector<double>> structure_type_means(const HeterogeneousGraph& g,
                                                        const GraphStructure& s,
                                                        const EmbeddingTable& emb);

// Cosine of per-type mean embeddings over the structure's objects; the
// cosine involving a zero vector is 0.
double type_similarity(const HeterogeneousGraph& g, const GraphStructure& s,
                       const EmbeddingTable& emb, int type_a, int type_b);

// Draft for repair: induced objects/links of a subgraph before
// normalization.
struct SubgraphDraft {
  int u = -1;
  int v = -1;
  std::vector<int> objects;  // sorted global ids
  std::vector<NormalizedSubgraph::SubLink> links;
};

// Adds synthetic links until every object reaches both query objects:
// repeatedly takes the lowest-id isolated object (query objects are never
// isolated objects), links it to its unreachable query object (to v when it
// reaches neither), and rechecks. A subgraph left with the query pair split
// and no object to route through gets a direct u-v link. Returns the number
// of links added.
int repair_isolated(SubgraphDraft& draft, int synthetic_link_type);

// N_subg normalized subgraphs for one structure: per N_type setting and
// draw, sample types (query types forced, rest proportional to the
// structure's type counts, clamped to the structure's type count), induce,
// repair, rank types by summed similarity to the query types (ties by type
// name ascending).
SubgraphSet generate_subgraphs(const HeterogeneousGraph& g, const GraphStructure& s,
                               const EmbeddingTable& emb, const ExtractionParams& params);

// Full extraction for one labeled pair. Throws NoPathError in path mode for
// disconnected pairs.
SubgraphSet extract_pair(const HeterogeneousGraph& g, const EmbeddingTable& emb,
                         const ExtractionParams& params, int u, int v);

// Extraction results for every labeled pair of a corpus, keyed by
// (corpus hash, extraction params). Pairs whose extraction fails are
// recorded and skipped.
class ExtractionCache {
 public:
  struct SkippedPair {
    std::string graph_id;
    int u, v;
    std::string reason;
  };

  static ExtractionCache build(const GraphCorpus& corpus, const EmbeddingCache& emb,
                               const ExtractionParams& params, int jobs = 1);

  const SubgraphSet* find(const std::string& graph_id, int u, int v) const;
  const std::vector<SkippedPair>& skipped() const { return skipped_; }

  uint64_t corpus_hash() const { return corpus_hash_; }
  const std::string& params_fingerprint() const { return params_fp_; }
  size_t size() const { return sets_.size(); }

  void save(const std::string& path) const;
  // Validates the stored key against the given corpus/params.
  static ExtractionCache load(const std::string& path, uint64_t expect_corpus_hash,
                              const std::string& expect_params_fp);

 private:
  std::map<std::tuple<std::string, int, int>, SubgraphSet> sets_;
  std::vector<SkippedPair> skipped_;
  uint64_t corpus_hash_ = 0;
  std::string params_fp_;
};

// One N_rel-way episode: support/query items reference cached SubgraphSets
// and carry relation indices into relation_names.
struct EpisodeTask {
  std::string graph_id;
  std::vector<std::string> relation_names;
  std::vector<std::pair<const SubgraphSet*, int>> support;  // N_rel * K_spt
  std::vector<std::pair<const SubgraphSet*, int>> query;    // N_rel * K_qry
};

// Which graphs and which of their relations an episode stream may draw from.
struct SplitSpec {
  struct GraphRelations {
    std::string graph_id;
    std::vector<std::string> relations;
  };
  std::vector<GraphRelations> graphs;
};

// Deterministic episode stream over a split. Construction validates that
// every split graph has >= N_rel relations with >= K_spt + K_qry extractable
// pairs (InsufficientData otherwise).
class EpisodeSampler {
 public:
  EpisodeSampler(const GraphCorpus& corpus, const ExtractionCache& cache, SplitSpec split,
                 int n_rel, int k_spt, int k_qry, uint64_t seed);

  EpisodeTask episode(int index) const;
  int n_rel() const { return n_rel_; }
  int k_spt() const { return k_spt_; }
  int k_qry() const { return k_qry_; }

 private:
  struct RelationPairs {
    std::string name;
    std::vector<ObjectPair> pairs;  // extractable only
  };
  struct GraphEntry {
    std::string graph_id;
    std::vector<RelationPairs> relations;
  };
  const ExtractionCache* cache_;
  std::vector<GraphEntry> graphs_;
  int n_rel_, k_spt_, k_qry_;
  uint64_t seed_;
};

std::vector<EpisodeTask> build_episodes(const EpisodeSampler& sampler, int n_episodes);

}  // namespace metags
