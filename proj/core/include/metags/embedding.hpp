#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metags/graph.hpp"

namespace metags {

struct EmbedParams {
  int dim = 64;
  uint64_t seed = 1;
  // Expected-walk weights: walks per start object, walk length, window.
  int walks_per_object = 80;
  int walk_length = 10;
  int window = 5;

  std::string fingerprint() const;
};

// Per-object embedding table of one graph; row i belongs to object id i.
struct EmbeddingTable {
  int dim = 0;
  std::vector<std::vector<double>> vectors;

  const std::vector<double>& vec(int obj) const { return vectors[size_t(obj)]; }
};

// Deterministic spectral embedding standing in for the usual sampled-walk
// methods: the window co-occurrence matrix is computed in closed form from
// powers of the walk transition matrix (walks x window positions as
// weights), shifted to positive PMI, and factored by seeded orthogonal
// subspace iteration. Exactly preserves graph automorphisms and is
// independent of object insertion order. Requested dimensions beyond the
// spectrum's rank come back as zero columns.
EmbeddingTable pretrain_embeddings(const HeterogeneousGraph& g, const EmbedParams& params);

// Cache file holding tables for many graphs, keyed by
// (graph id, dim, seed, method version).
struct EmbeddingCache {
  std::map<std::string, EmbeddingTable> tables;  // graph id -> table
  std::string params_fingerprint;

  const EmbeddingTable& table(const std::string& graph_id) const;
};

EmbeddingCache compute_embeddings(const GraphCorpus& corpus, const EmbedParams& params);
void save_embedding_cache(const EmbeddingCache& cache, const std::string& path);
EmbeddingCache load_embedding_cache(const std::string& path);

}  // namespace metags
