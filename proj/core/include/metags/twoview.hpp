#pragma once

#include <functional>
#include <string>
#include <vector>

#include "metags/autodiff.hpp"
#include "metags/extract.hpp"
#include "metags/graph.hpp"

namespace metags {

// Ablation wiring: full model, 2-hop structure extraction, object-view only,
// graph-view only, or plain-mean prototypes.
enum class Variant { Full, TwoHop, NoOv, NoGv, NoHyper };

Variant variant_from_string(const std::string& s);
const char* variant_name(Variant v);

struct ModelConfig {
  int d_h = 64;   // object-view projection/output dimension
  int d_gv = 64;  // graph-view output dimension
  int hop_h = 2;  // object-view neighborhood radius
  // Structural-feature widths, fixed across graphs: distance buckets
  // (clamping at d_max - 1) and rank slots 1..n_type_max with 0 reserved for
  // the query objects.
  int d_max = 8;
  int n_type_max = 6;
  int gv_layers = 2;
  int hyper_layers = 2;
  double theta_ho = 0.75;
  double theta_he = 0.15;
  double leaky_slope = 0.01;
  Variant variant = Variant::Full;
  uint64_t param_seed = 1;

  int st_len() const { return d_max + n_type_max + 1; }
  // Dimension of one subgraph embedding z under the active variant.
  int z_dim() const {
    if (variant == Variant::NoOv) return d_gv;
    if (variant == Variant::NoGv) return d_h;
    return d_h + d_gv;
  }
  void validate() const;
  std::string fingerprint() const;
};

// Object-view parameters: per-rank-slot neighbor attention, type-level
// attention, and projection matrices keyed by (slot, raw feature dimension).
// Raw dimensions differ across graphs, so projections are created lazily on
// first use with name-derived seeded init (order-independent).
struct OvgcParams {
  ad::ParamStore* store = nullptr;
  const ModelConfig* cfg = nullptr;
  std::function<void(const std::string&)> lazy_log;

  void init(ad::ParamStore* s, const ModelConfig* c);
  ad::Tensor projection(int slot, int in_dim) const;
  ad::Tensor slot_attention(int slot) const;  // length 2*d_h
  ad::Tensor type_w() const;                  // d_h x d_h
  ad::Tensor type_b() const;                  // d_h
  ad::Tensor type_a() const;                  // d_h
};

// Graph-view parameters: two rounds of mean-aggregator message passing plus
// the output projection.
struct GvgcParams {
  ad::ParamStore* store = nullptr;
  const ModelConfig* cfg = nullptr;

  void init(ad::ParamStore* s, const ModelConfig* c);
  ad::Tensor sage_self(int layer) const;
  ad::Tensor sage_neigh(int layer) const;
  ad::Tensor out_w() const;  // d_gv x d_gv
};

// Memoizing h_i provider for one subgraph forward pass: h_i = W_{slot,dim} x_i.
// Records requested local indices into access_log when set.
class ProjectionProvider {
 public:
  ProjectionProvider(const HeterogeneousGraph& g, const NormalizedSubgraph& sub,
                     const OvgcParams& params, std::vector<int>* access_log = nullptr);
  ad::Tensor operator()(int local_idx);

 private:
  const HeterogeneousGraph* g_;
  const NormalizedSubgraph* sub_;
  const OvgcParams* params_;
  std::vector<int>* access_log_;
  std::vector<ad::Tensor> cache_;
};

// Object-view embedding z_ov: per query object and rank slot, attention over
// the slot's objects within hop_radius hops, then type-level attention over
// the summed query-object slot embeddings.
ad::Tensor ovgc_embed(const NormalizedSubgraph& sub, const OvgcParams& params, int hop_radius,
                      ProjectionProvider& h);

// Structural label encoding: one-hot(d(i,u)) + one-hot(d(i,v)) ++
// one-hot(rank), with the query objects fixed at (0,1,0)/(1,0,0) and rank 0.
std::vector<double> structural_feature(const NormalizedSubgraph& sub, int local_idx,
                                       const ModelConfig& cfg);

// Graph-view embedding z_gv: per-object [h_st ++ h_i], gv_layers rounds of
// mean-neighbor message passing with relu, mean-pool, output projection.
ad::Tensor gvgc_embed(const NormalizedSubgraph& sub, const GvgcParams& params,
                      ProjectionProvider& h);

// Final subgraph embedding under the active variant ([z_ov ++ z_gv] for the
// full model).
ad::Tensor subgraph_embed(const HeterogeneousGraph& g, const NormalizedSubgraph& sub,
                          const OvgcParams& ovgc, const GvgcParams& gvgc,
                          const ModelConfig& cfg);

}  // namespace metags
