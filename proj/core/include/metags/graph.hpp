#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metags {

struct ObjectRecord {
  int id = 0;       // dense, unique within the graph
  int type_id = 0;  // index into object_types
  std::vector<double> feature;
};

// Undirected typed link, stored canonically with src < dst.
struct Link {
  int src = 0;
  int dst = 0;
  int type_id = 0;
  auto operator<=>(const Link&) const = default;
};

using ObjectPair = std::pair<int, int>;
using RelationMap = std::map<std::string, std::vector<ObjectPair>>;

// Typed undirected graph with per-object features. Immutable once
// finalize() has run: construction (loader, generator, tests) fills the
// public fields, then finalize() builds the adjacency index and checks
// every structural invariant.
class HeterogeneousGraph {
 public:
  std::string id;
  std::vector<std::string> object_types;
  std::vector<std::string> link_types;
  std::vector<ObjectRecord> objects;  // position == object id after finalize
  std::vector<Link> links;            // canonical, sorted, deduplicated
  RelationMap relations;

  // Builds adjacency, symmetrizes/canonicalizes links, synthesizes missing
  // features and validates all invariants. Throws ValidationError with the
  // offending identifier.
  void finalize();

  int n_objects() const { return int(objects.size()); }
  int n_links() const { return int(links.size()); }

  // Sorted (neighbor id, link type id) pairs; one entry per typed link.
  const std::vector<std::pair<int, int>>& neighbors(int obj) const;

  // Neighbor ids only (typed multi-links collapsed), sorted unique.
  const std::vector<std::vector<int>>& adjacency() const { return plain_adj_; }

  int object_type(int obj) const { return objects[size_t(obj)].type_id; }
  const std::vector<double>& feature(int obj) const {
    return objects[size_t(obj)].feature;
  }

  // Link type id reserved for repair links added during subgraph
  // normalization; one past the declared vocabulary.
  int synthetic_link_type() const { return int(link_types.size()); }

  bool finalized() const { return finalized_; }

 private:
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::vector<std::vector<int>> plain_adj_;
  bool finalized_ = false;
};

// Unweighted BFS hop counts from src; -1 marks unreachable vertices.
std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int src);

// Hop distance between two objects, std::nullopt when disconnected.
std::optional<int> shortest_distance(const HeterogeneousGraph& g, int a, int b);

class GraphCorpus {
 public:
  std::vector<HeterogeneousGraph> graphs;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;

  // Cross-graph invariants: split ids resolve and are pairwise disjoint,
  // graph ids unique, base/novel relation names disjoint.
  void validate() const;

  const HeterogeneousGraph& graph(const std::string& graph_id) const;
  std::vector<const HeterogeneousGraph*> split_graphs(const std::vector<std::string>& ids) const;
};

// Corpus file IO. The on-disk format is a single UTF-8 JSON document; see
// corpus_to_json for the exact schema. Loading validates everything.
GraphCorpus load_corpus(const std::string& path);
void save_corpus(const GraphCorpus& corpus, const std::string& path);

GraphCorpus corpus_from_json(std::string_view text, const std::string& locus);
std::string corpus_to_json(const GraphCorpus& corpus);

// FNV-1a of the canonical serialization; cache files key on this.
uint64_t corpus_content_hash(const GraphCorpus& corpus);

}  // namespace metags
