#include "metags/hyperproto.hpp"

#include <cmath>

#include "metags/errors.hpp"
#include "metags/rng.hpp"

namespace metags {

namespace {

double cosine_values(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;  // zero-norm embeddings attach nowhere
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

HyperGraph build_hypergraph(const std::vector<ad::Tensor>& embs, double theta_ho,
                            double theta_he) {
  if (embs.empty()) throw ValidationError("build_hypergraph: no embeddings");
  if (!(theta_ho > theta_he)) {
    throw ValidationError("build_hypergraph: theta_ho must exceed theta_he");
  }
  HyperGraph hg;
  hg.n_nodes = int(embs.size());
  hg.theta_ho = theta_ho;
  hg.theta_he = theta_he;
  hg.homo_adj.assign(embs.size(), {});
  hg.hetero_adj.assign(embs.size(), {});
  for (size_t i = 0; i < embs.size(); ++i) {
    for (size_t j = i + 1; j < embs.size(); ++j) {
      double sim = cosine_values(embs[i].values(), embs[j].values());
      if (sim > theta_ho) {
        hg.homo_adj[i].push_back(int(j));
        hg.homo_adj[j].push_back(int(i));
      } else if (sim < theta_he) {
        hg.hetero_adj[i].push_back(int(j));
        hg.hetero_adj[j].push_back(int(i));
      }
    }
  }
  return hg;
}

void HyperGnnParams::init(ad::ParamStore* s, const ModelConfig* c) {
  store = s;
  cfg = c;
  for (int l = 0; l < cfg->hyper_layers; ++l) {
    for (const char* channel : {"ho", "he"}) {
      std::string name = std::string("hyper.") + channel + ".l" + std::to_string(l);
      if (!store->contains(name)) {
        uint64_t seed =
            Rng::derive(cfg->param_seed, {Rng::key("param-init"), fnv1a(name)}).next_u64();
        store->create(name, {2 * cfg->z_dim()}, seed);
      }
    }
  }
}

ad::Tensor HyperGnnParams::attention(bool homophily, int layer) const {
  return store->get(std::string("hyper.") + (homophily ? "ho" : "he") + ".l" +
                    std::to_string(layer));
}

namespace {

// One channel layer: attention-weighted sum over the channel's neighbors.
// Nodes without neighbors keep their previous state so small support sets
// do not collapse to zero.
std::vector<ad::Tensor> channel_layer(const std::vector<ad::Tensor>& state,
                                      const std::vector<std::vector<int>>& adj,
                                      const ad::Tensor& attn, double slope) {
  std::vector<ad::Tensor> next;
  next.reserve(state.size());
  for (size_t i = 0; i < state.size(); ++i) {
    const std::vector<int>& nbrs = adj[i];
    if (nbrs.empty()) {
      next.push_back(state[i]);
      continue;
    }
    std::vector<ad::Tensor> scores;
    scores.reserve(nbrs.size());
    for (int j : nbrs) {
      scores.push_back(ad::leaky_relu(ad::dot(ad::concat(state[i], state[size_t(j)]), attn), slope));
    }
    std::vector<ad::Tensor> alphas = ad::softmax_list(scores);
    std::vector<ad::Tensor> weighted;
    weighted.reserve(nbrs.size());
    for (size_t k = 0; k < nbrs.size(); ++k) {
      weighted.push_back(ad::scale_by(state[size_t(nbrs[k])], alphas[k]));
    }
    next.push_back(ad::leaky_relu(ad::sum_list(weighted), slope));
  }
  return next;
}

}  // namespace

std::vector<ad::Tensor> hyper_gnn(const std::vector<ad::Tensor>& embs, const HyperGraph& hg,
                                  const HyperGnnParams& params) {
  if (int(embs.size()) != hg.n_nodes) {
    throw ValidationError("hyper_gnn: embedding count does not match the hyper-graph");
  }
  const ModelConfig& cfg = *params.cfg;
  std::vector<ad::Tensor> ho = embs;
  std::vector<ad::Tensor> he = embs;
  for (int l = 0; l < cfg.hyper_layers; ++l) {
    ho = channel_layer(ho, hg.homo_adj, params.attention(true, l), cfg.leaky_slope);
    he = channel_layer(he, hg.hetero_adj, params.attention(false, l), cfg.leaky_slope);
  }
  std::vector<ad::Tensor> out;
  out.reserve(embs.size());
  for (size_t i = 0; i < embs.size(); ++i) out.push_back(ad::concat(ho[i], he[i]));
  return out;
}

ad::Tensor proto_sr(const std::vector<ad::Tensor>& embs, const HyperGnnParams& params,
                    double theta_ho, double theta_he) {
  HyperGraph hg = build_hypergraph(embs, theta_ho, theta_he);
  return ad::mean_list(hyper_gnn(embs, hg, params));
}

ad::Tensor pair_embed(const std::vector<ad::Tensor>& embs, const HyperGnnParams& params,
                      double theta_ho, double theta_he) {
  // identical machinery: an object pair is pooled exactly like a prototype
  return proto_sr(embs, params, theta_ho, theta_he);
}

ad::Tensor classify(const ad::Tensor& pair_embedding, const std::vector<ad::Tensor>& prototypes) {
  if (prototypes.empty()) throw ValidationError("classify: no prototypes");
  std::vector<ad::Tensor> neg_dists;
  neg_dists.reserve(prototypes.size());
  for (const ad::Tensor& p : prototypes) {
    if (p.shape() != pair_embedding.shape()) {
      throw ValidationError("classify: prototype/pair embedding dimension mismatch");
    }
    neg_dists.push_back(ad::negate(ad::squared_euclidean(pair_embedding, p)));
  }
  return ad::softmax(ad::stack(neg_dists));
}

ad::Tensor episode_loss(const std::vector<ad::Tensor>& query_probs,
                        const std::vector<int>& labels) {
  if (query_probs.empty() || query_probs.size() != labels.size()) {
    throw ValidationError("episode_loss: probability/label count mismatch");
  }
  std::vector<ad::Tensor> log_terms;
  log_terms.reserve(query_probs.size());
  for (size_t i = 0; i < query_probs.size(); ++i) {
    log_terms.push_back(ad::log(ad::select(query_probs[i], labels[i]), 1e-12));
  }
  return ad::negate(ad::scale(ad::sum_list(log_terms), 1.0 / double(log_terms.size())));
}

}  // namespace metags
