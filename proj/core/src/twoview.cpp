#include "metags/twoview.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "metags/errors.hpp"
#include "metags/rng.hpp"

namespace metags {

Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::Full;
  if (s == "2hop") return Variant::TwoHop;
  if (s == "no-ov") return Variant::NoOv;
  if (s == "no-gv") return Variant::NoGv;
  if (s == "no-hyper") return Variant::NoHyper;
  throw ConfigError("unknown variant '" + s + "' (expected full|2hop|no-ov|no-gv|no-hyper)");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::TwoHop: return "2hop";
    case Variant::NoOv: return "no-ov";
    case Variant::NoGv: return "no-gv";
    case Variant::NoHyper: return "no-hyper";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (d_h < 1 || d_gv < 1) throw ConfigError("model: d_h and d_gv must be >= 1");
  if (hop_h < 1) throw ConfigError("model: hop_h must be >= 1");
  if (d_max < 2) throw ConfigError("model: d_max must be >= 2");
  if (n_type_max < 2) throw ConfigError("model: n_type_max must be >= 2");
  if (gv_layers < 1) throw ConfigError("model: gv_layers must be >= 1");
  if (hyper_layers < 1) throw ConfigError("model: hyper_layers must be >= 1");
  if (!(theta_ho > theta_he)) throw ConfigError("model: theta_ho must exceed theta_he");
}

std::string ModelConfig::fingerprint() const {
  std::ostringstream s;
  s.precision(17);
  s << "v1:d_h=" << d_h << ":d_gv=" << d_gv << ":hop=" << hop_h << ":d_max=" << d_max
    << ":nt_max=" << n_type_max << ":gvl=" << gv_layers << ":hyl=" << hyper_layers
    << ":tho=" << theta_ho << ":the=" << theta_he << ":slope=" << leaky_slope
    << ":variant=" << variant_name(variant) << ":pseed=" << param_seed;
  return s.str();
}

namespace {

uint64_t init_seed_for(const ModelConfig& cfg, const std::string& name) {
  return Rng::derive(cfg.param_seed, {Rng::key("param-init"), fnv1a(name)}).next_u64();
}

ad::Tensor get_or_create(ad::ParamStore* store, const ModelConfig& cfg, const std::string& name,
                         const std::vector<int>& shape) {
  if (store->contains(name)) return store->get(name);
  return store->create(name, shape, init_seed_for(cfg, name));
}

}  // namespace

void OvgcParams::init(ad::ParamStore* s, const ModelConfig* c) {
  store = s;
  cfg = c;
  for (int k = 1; k <= cfg->n_type_max; ++k) {
    get_or_create(store, *cfg, "ovgc.attn.s" + std::to_string(k), {2 * cfg->d_h});
  }
  get_or_create(store, *cfg, "ovgc.type.w", {cfg->d_h, cfg->d_h});
  get_or_create(store, *cfg, "ovgc.type.b", {cfg->d_h});
  get_or_create(store, *cfg, "ovgc.type.a", {cfg->d_h});
}

ad::Tensor OvgcParams::projection(int slot, int in_dim) const {
  std::string name = "ovgc.proj.s" + std::to_string(slot) + ".d" + std::to_string(in_dim);
  if (!store->contains(name) && lazy_log) {
    lazy_log("creating projection " + name);
  }
  return get_or_create(store, *cfg, name, {cfg->d_h, in_dim});
}

ad::Tensor OvgcParams::slot_attention(int slot) const {
  if (slot < 1 || slot > cfg->n_type_max) {
    throw ValidationError("ovgc: rank slot " + std::to_string(slot) + " outside 1.." +
                          std::to_string(cfg->n_type_max));
  }
  return store->get("ovgc.attn.s" + std::to_string(slot));
}

ad::Tensor OvgcParams::type_w() const { return store->get("ovgc.type.w"); }
ad::Tensor OvgcParams::type_b() const { return store->get("ovgc.type.b"); }
ad::Tensor OvgcParams::type_a() const { return store->get("ovgc.type.a"); }

void GvgcParams::init(ad::ParamStore* s, const ModelConfig* c) {
  store = s;
  cfg = c;
  for (int l = 0; l < cfg->gv_layers; ++l) {
    int in_dim = l == 0 ? cfg->st_len() + cfg->d_h : cfg->d_gv;
    get_or_create(store, *cfg, "gvgc.l" + std::to_string(l) + ".self", {cfg->d_gv, in_dim});
    get_or_create(store, *cfg, "gvgc.l" + std::to_string(l) + ".neigh", {cfg->d_gv, in_dim});
  }
  get_or_create(store, *cfg, "gvgc.out.w", {cfg->d_gv, cfg->d_gv});
}

ad::Tensor GvgcParams::sage_self(int layer) const {
  return store->get("gvgc.l" + std::to_string(layer) + ".self");
}
ad::Tensor GvgcParams::sage_neigh(int layer) const {
  return store->get("gvgc.l" + std::to_string(layer) + ".neigh");
}
ad::Tensor GvgcParams::out_w() const { return store->get("gvgc.out.w"); }

ProjectionProvider::ProjectionProvider(const HeterogeneousGraph& g, const NormalizedSubgraph& sub,
                                       const OvgcParams& params, std::vector<int>* access_log)
    : g_(&g), sub_(&sub), params_(&params), access_log_(access_log) {
  cache_.resize(sub.objects.size());
}

ad::Tensor ProjectionProvider::operator()(int local_idx) {
  if (local_idx < 0 || local_idx >= int(sub_->objects.size())) {
    throw ValidationError("projection: local index out of range");
  }
  if (access_log_) access_log_->push_back(local_idx);
  ad::Tensor& slot = cache_[size_t(local_idx)];
  if (!slot.defined()) {
    int obj = sub_->objects[size_t(local_idx)];
    const std::vector<double>& x = g_->feature(obj);
    ad::Tensor w = params_->projection(sub_->slot[size_t(local_idx)], int(x.size()));
    slot = ad::matvec(w, ad::Tensor::vector(x));
  }
  return slot;
}

ad::Tensor ovgc_embed(const NormalizedSubgraph& sub, const OvgcParams& params, int hop_radius,
                      ProjectionProvider& h) {
  const ModelConfig& cfg = *params.cfg;
  const int n_types = sub.n_types();
  const int lu = sub.local_index(sub.u);
  const int lv = sub.local_index(sub.v);

  // slot_embs[q][k-1]: Eq.-4-style attention aggregate of the rank-k objects
  // within hop_radius hops of query object q.
  std::vector<std::vector<ad::Tensor>> slot_embs(2);
  for (int side = 0; side < 2; ++side) {
    int lq = side == 0 ? lu : lv;
    const std::vector<int>& dist = side == 0 ? sub.dist_u : sub.dist_v;
    for (int k = 1; k <= n_types; ++k) {
      std::vector<int> members;
      for (size_t i = 0; i < sub.objects.size(); ++i) {
        if (int(i) == lq) continue;
        if (dist[i] >= 0 && dist[i] <= hop_radius && sub.slot[i] == k) members.push_back(int(i));
      }
      if (members.empty()) {
        // no rank-k object in range: the slot contributes nothing
        slot_embs[size_t(side)].push_back(ad::Tensor::zeros({cfg.d_h}));
        continue;
      }
      ad::Tensor a_k = params.slot_attention(k);
      ad::Tensor hq = h(lq);
      std::vector<ad::Tensor> scores;
      scores.reserve(members.size());
      for (int i : members) {
        scores.push_back(
            ad::leaky_relu(ad::dot(ad::concat(hq, h(i)), a_k), cfg.leaky_slope));
      }
      std::vector<ad::Tensor> alphas = ad::softmax_list(scores);
      std::vector<ad::Tensor> weighted;
      weighted.reserve(members.size());
      for (size_t i = 0; i < members.size(); ++i) {
        weighted.push_back(ad::scale_by(h(members[i]), alphas[i]));
      }
      slot_embs[size_t(side)].push_back(
          ad::leaky_relu(ad::sum_list(weighted), cfg.leaky_slope));
    }
  }

  // Type-level attention over f_agg = sum of the two query-side aggregates.
  std::vector<ad::Tensor> fused;
  std::vector<ad::Tensor> type_scores;
  for (int k = 0; k < n_types; ++k) {
    ad::Tensor f = ad::add(slot_embs[0][size_t(k)], slot_embs[1][size_t(k)]);
    fused.push_back(f);
    ad::Tensor w = ad::dot(
        ad::tanh(ad::add(ad::matvec(params.type_w(), f), params.type_b())), params.type_a());
    type_scores.push_back(w);
  }
  std::vector<ad::Tensor> betas = ad::softmax_list(type_scores);
  std::vector<ad::Tensor> weighted;
  for (int k = 0; k < n_types; ++k) weighted.push_back(ad::scale_by(fused[size_t(k)], betas[size_t(k)]));
  return ad::sum_list(weighted);
}

std::vector<double> structural_feature(const NormalizedSubgraph& sub, int local_idx,
                                       const ModelConfig& cfg) {
  if (local_idx < 0 || local_idx >= int(sub.objects.size())) {
    throw ValidationError("structural_feature: unknown object index");
  }
  if (sub.n_types() > cfg.n_type_max) {
    throw ValidationError("structural_feature: subgraph has " + std::to_string(sub.n_types()) +
                          " types but the model is sized for " + std::to_string(cfg.n_type_max));
  }
  const int lu = sub.local_index(sub.u);
  const int lv = sub.local_index(sub.v);
  int du, dv, rank;
  if (local_idx == lu) {
    du = 0, dv = 1, rank = 0;
  } else if (local_idx == lv) {
    du = 1, dv = 0, rank = 0;
  } else {
    du = sub.dist_u[size_t(local_idx)];
    dv = sub.dist_v[size_t(local_idx)];
    rank = sub.slot[size_t(local_idx)];
  }
  std::vector<double> out(size_t(cfg.st_len()), 0.0);
  out[size_t(std::min(du, cfg.d_max - 1))] += 1.0;
  out[size_t(std::min(dv, cfg.d_max - 1))] += 1.0;
  out[size_t(cfg.d_max + rank)] = 1.0;
  return out;
}

ad::Tensor gvgc_embed(const NormalizedSubgraph& sub, const GvgcParams& params,
                      ProjectionProvider& h) {
  const ModelConfig& cfg = *params.cfg;
  const int n = int(sub.objects.size());

  std::vector<ad::Tensor> state;
  state.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    state.push_back(
        ad::concat(ad::Tensor::vector(structural_feature(sub, i, cfg)), h(i)));
  }
  for (int l = 0; l < cfg.gv_layers; ++l) {
    ad::Tensor w_self = params.sage_self(l);
    ad::Tensor w_neigh = params.sage_neigh(l);
    std::vector<ad::Tensor> next;
    next.reserve(size_t(n));
    for (int i = 0; i < n; ++i) {
      const std::vector<int>& nbrs = sub.local_adj[size_t(i)];
      ad::Tensor agg;
      if (nbrs.empty()) {
        agg = ad::Tensor::zeros({int(state[size_t(i)].shape()[0])});
      } else {
        std::vector<ad::Tensor> msgs;
        msgs.reserve(nbrs.size());
        for (int j : nbrs) msgs.push_back(state[size_t(j)]);
        agg = ad::mean_list(msgs);
      }
      next.push_back(
          ad::relu(ad::add(ad::matvec(w_self, state[size_t(i)]), ad::matvec(w_neigh, agg))));
    }
    state = std::move(next);
  }
  ad::Tensor pooled = ad::mean_list(state);
  return ad::relu(ad::matvec(params.out_w(), pooled));
}

ad::Tensor subgraph_embed(const HeterogeneousGraph& g, const NormalizedSubgraph& sub,
                          const OvgcParams& ovgc, const GvgcParams& gvgc,
                          const ModelConfig& cfg) {
  ProjectionProvider h(g, sub, ovgc);
  switch (cfg.variant) {
    case Variant::NoOv:
      return gvgc_embed(sub, gvgc, h);
    case Variant::NoGv:
      return ovgc_embed(sub, ovgc, cfg.hop_h, h);
    default: {
      ad::Tensor z_ov = ovgc_embed(sub, ovgc, cfg.hop_h, h);
      ad::Tensor z_gv = gvgc_embed(sub, gvgc, h);
      return ad::concat(z_ov, z_gv);
    }
  }
}

}  // namespace metags
