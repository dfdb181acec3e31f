#pragma once

#include <vector>

#include "metags/autodiff.hpp"
#include "metags/twoview.hpp"

namespace metags {

// Derived graph over subgraph embeddings: nodes connect as homophily
// neighbors when cos(z_i, z_j) > theta_ho and as heterophily neighbors when
// cos(z_i, z_j) < theta_he. The two edge sets are disjoint by construction.
struct HyperGraph {
  int n_nodes = 0;
  double theta_ho = 0.75;
  double theta_he = 0.15;
  std::vector<std::vector<int>> homo_adj;
  std::vector<std::vector<int>> hetero_adj;
};

HyperGraph build_hypergraph(const std::vector<ad::Tensor>& embs, double theta_ho, double theta_he);

// Per-layer homophily/heterophily attention vectors, each of length
// 2 * z_dim; shared across all relations and graphs.
struct HyperGnnParams {
  ad::ParamStore* store = nullptr;
  const ModelConfig* cfg = nullptr;

  void init(ad::ParamStore* s, const ModelConfig* c);
  ad::Tensor attention(bool homophily, int layer) const;
};

// hyper_layers rounds of channel-wise attention aggregation; a node with no
// neighbors in a channel keeps its previous state for that layer. Returns
// per-node [z_ho ++ z_he].
std::vector<ad::Tensor> hyper_gnn(const std::vector<ad::Tensor>& embs, const HyperGraph& hg,
                                  const HyperGnnParams& params);

// Relation prototype: hyper-graph over the support subgraph embeddings,
// hyper-GNN, mean pool. Query/support object pairs run through the same
// machinery over their own subgraph set.
ad::Tensor proto_sr(const std::vector<ad::Tensor>& embs, const HyperGnnParams& params,
                    double theta_ho, double theta_he);
ad::Tensor pair_embed(const std::vector<ad::Tensor>& embs, const HyperGnnParams& params,
                      double theta_ho, double theta_he);

// Softmax over negative squared euclidean distances to the prototypes.
ad::Tensor classify(const ad::Tensor& pair_embedding, const std::vector<ad::Tensor>& prototypes);

// Mean negative log-likelihood of the correct labels; probabilities are
// clamped at 1e-12 inside the log.
ad::Tensor episode_loss(const std::vector<ad::Tensor>& query_probs, const std::vector<int>& labels);

}  // namespace metags
