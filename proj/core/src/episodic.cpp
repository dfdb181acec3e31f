#include "metags/episodic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "binio.hpp"
#include "metags/errors.hpp"
#include "metags/rng.hpp"

namespace metags {

void TrainConfig::validate() const {
  if (episodes < 1) throw ConfigError("train: episodes must be >= 1");
  if (learning_rate < 0.0) throw ConfigError("train: learning_rate must be >= 0");
  if (k_spt < 1 || k_qry < 1 || n_rel < 1) {
    throw ConfigError("train: K_spt, K_qry and N_rel must be >= 1");
  }
  if (val_every < 1) throw ConfigError("train: val_every must be >= 1");
  if (val_episodes < 1) throw ConfigError("train: val_episodes must be >= 1");
}

Model::Model(ModelConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  ovgc_.init(&store_, &cfg_);
  gvgc_.init(&store_, &cfg_);
  hyper_.init(&store_, &cfg_);
}

ad::Tensor Model::embed_subgraph(const HeterogeneousGraph& g, const NormalizedSubgraph& sub) {
  return subgraph_embed(g, sub, ovgc_, gvgc_, cfg_);
}

ad::Tensor Model::pair_embedding(const HeterogeneousGraph& g, const SubgraphSet& set) {
  if (set.subgraphs.empty()) throw ValidationError("pair_embedding: empty subgraph set");
  std::vector<ad::Tensor> embs;
  embs.reserve(set.subgraphs.size());
  for (const NormalizedSubgraph& sub : set.subgraphs) embs.push_back(embed_subgraph(g, sub));
  if (cfg_.variant == Variant::NoHyper) return ad::mean_list(embs);
  return pair_embed(embs, hyper_, cfg_.theta_ho, cfg_.theta_he);
}

std::vector<ad::Tensor> Model::compute_prototypes(const HeterogeneousGraph& g,
                                                  const EpisodeTask& task) {
  const int n_rel = int(task.relation_names.size());
  // per relation: raw subgraph embeddings (full path) or per-pair means
  std::vector<std::vector<ad::Tensor>> per_relation(static_cast<size_t>(n_rel));
  std::vector<std::vector<ad::Tensor>> per_relation_pairs(static_cast<size_t>(n_rel));
  for (const auto& [set, r] : task.support) {
    if (cfg_.variant == Variant::NoHyper) {
      per_relation_pairs[size_t(r)].push_back(pair_embedding(g, *set));
    } else {
      for (const NormalizedSubgraph& sub : set->subgraphs) {
        per_relation[size_t(r)].push_back(embed_subgraph(g, sub));
      }
    }
  }
  std::vector<ad::Tensor> protos;
  protos.reserve(size_t(n_rel));
  for (int r = 0; r < n_rel; ++r) {
    if (cfg_.variant == Variant::NoHyper) {
      // plain-mean ablation: average of the relation's embedded samples
      protos.push_back(ad::mean_list(per_relation_pairs[size_t(r)]));
    } else {
      protos.push_back(proto_sr(per_relation[size_t(r)], hyper_, cfg_.theta_ho, cfg_.theta_he));
    }
  }
  return protos;
}

Model::EpisodeOutput Model::forward(const GraphCorpus& corpus, const EpisodeTask& task) {
  const HeterogeneousGraph& g = corpus.graph(task.graph_id);
  EpisodeOutput out;
  std::vector<ad::Tensor> protos = compute_prototypes(g, task);

  std::vector<ad::Tensor> probs;
  probs.reserve(task.query.size());
  for (const auto& [set, r] : task.query) {
    ad::Tensor z = pair_embedding(g, *set);
    ad::Tensor p = classify(z, protos);
    probs.push_back(p);
    out.labels.push_back(r);
    out.query_probs.push_back(p.values());
    const std::vector<double>& pv = p.values();
    out.predictions.push_back(
        int(std::max_element(pv.begin(), pv.end()) - pv.begin()));
  }
  out.loss = episode_loss(probs, out.labels);
  return out;
}

uint64_t Model::config_fingerprint() const { return fnv1a(cfg_.fingerprint()); }

// ---------------------------------------------------------------------------
// Checkpointing

namespace {
constexpr char kCkptMagic[4] = {'M', 'G', 'C', 'K'};
constexpr uint32_t kCkptVersion = 1;

void write_named_f64v(std::ostream& out, const std::map<std::string, std::vector<double>>& m) {
  detail::write_u32(out, uint32_t(m.size()));
  for (const auto& [name, v] : m) {
    detail::write_str(out, name);
    detail::write_f64v(out, v);
  }
}

std::map<std::string, std::vector<double>> read_named_f64v(std::istream& in) {
  std::map<std::string, std::vector<double>> m;
  uint32_t n = detail::read_u32(in);
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = detail::read_str(in);
    m[name] = detail::read_f64v(in);
  }
  return m;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
  using namespace detail;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(kCkptMagic, 4);
  write_u32(out, kCkptVersion);
  write_u64(out, config_fp);
  write_i32(out, episode);
  write_f64(out, best_val_accuracy);
  write_u64(out, uint64_t(adam_t));
  write_u32(out, uint32_t(tensors.size()));
  for (const auto& [name, sv] : tensors) {
    write_str(out, name);
    write_i32v(out, sv.first);
    write_f64v(out, sv.second);
  }
  write_named_f64v(out, adam_m);
  write_named_f64v(out, adam_v);
  if (!out) throw IoError("write failed for checkpoint '" + path + "'");
}

Checkpoint Checkpoint::load(const std::string& path) {
  using namespace detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCkptMagic, 4) != 0) {
    throw ParseError("checkpoint '" + path + "': bad magic");
  }
  if (read_u32(in) != kCkptVersion) {
    throw ParseError("checkpoint '" + path + "': unsupported version");
  }
  Checkpoint ckpt;
  ckpt.config_fp = read_u64(in);
  ckpt.episode = read_i32(in);
  ckpt.best_val_accuracy = read_f64(in);
  ckpt.adam_t = int64_t(read_u64(in));
  uint32_t n_tensors = read_u32(in);
  for (uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = read_str(in);
    std::vector<int> shape = read_i32v(in);
    std::vector<double> values = read_f64v(in);
    ckpt.tensors[name] = {std::move(shape), std::move(values)};
  }
  ckpt.adam_m = read_named_f64v(in);
  ckpt.adam_v = read_named_f64v(in);
  if (!in) throw ParseError("checkpoint '" + path + "': truncated file");
  return ckpt;
}

Checkpoint snapshot_model(const Model& model, int episode, double val_accuracy) {
  Checkpoint ckpt;
  ckpt.config_fp = model.config_fingerprint();
  ckpt.episode = episode;
  ckpt.best_val_accuracy = val_accuracy;
  model.params().visit([&](const std::string& name, const ad::Tensor& t) {
    ckpt.tensors[name] = {t.shape(), t.values()};
  });
  return ckpt;
}

void restore_model(Model& model, const Checkpoint& ckpt) {
  if (ckpt.config_fp != model.config_fingerprint()) {
    throw ValidationError("checkpoint config fingerprint mismatch: model was built with a "
                          "different configuration");
  }
  for (const auto& [name, sv] : ckpt.tensors) {
    const auto& [shape, values] = sv;
    ad::Tensor t;
    if (model.params().contains(name)) {
      t = model.params().get(name);
    } else if (name.rfind("ovgc.proj.", 0) == 0) {
      // lazily-keyed projection: recreate, then overwrite below
      uint64_t seed = Rng::derive(model.config().param_seed, {Rng::key("param-init"),
                                                              fnv1a(name)}).next_u64();
      t = model.params().create(name, shape, seed);
    } else {
      throw ValidationError("checkpoint holds unknown parameter '" + name + "'");
    }
    if (t.shape() != shape) {
      throw ValidationError("checkpoint parameter '" + name + "' has mismatched shape");
    }
    t.values() = values;
    t.zero_grad();
  }
}

// ---------------------------------------------------------------------------
// Optimization

void ParamOptimizer::step(ad::ParamStore& store) {
  ++t_;
  const double lr = cfg_.learning_rate;
  if (cfg_.optimizer == TrainConfig::Optimizer::Sgd) {
    store.visit([&](const std::string& name, ad::Tensor& t) {
      (void)name;
      if (t.grad().empty()) return;
      auto& v = t.values();
      const auto& g = t.grad();
      for (size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
    });
    return;
  }
  const double b1 = cfg_.adam_beta1;
  const double b2 = cfg_.adam_beta2;
  const double eps = cfg_.adam_eps;
  const double bc1 = 1.0 - std::pow(b1, double(t_));
  const double bc2 = 1.0 - std::pow(b2, double(t_));
  store.visit([&](const std::string& name, ad::Tensor& t) {
    auto& v = t.values();
    std::vector<double>& m = m_[name];
    std::vector<double>& s = v_[name];
    if (m.size() != v.size()) m.assign(v.size(), 0.0);
    if (s.size() != v.size()) s.assign(v.size(), 0.0);
    const std::vector<double>& g = t.grad();
    for (size_t i = 0; i < v.size(); ++i) {
      double gi = i < g.size() ? g[i] : 0.0;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      s[i] = b2 * s[i] + (1.0 - b2) * gi * gi;
      double mhat = m[i] / bc1;
      double shat = s[i] / bc2;
      v[i] -= lr * mhat / (std::sqrt(shat) + eps);
    }
  });
}

// ---------------------------------------------------------------------------
// Meta-training / meta-testing

double evaluate_accuracy(const GraphCorpus& corpus, const EpisodeSampler& sampler, Model& model,
                         int n_episodes) {
  long hits = 0;
  long total = 0;
  for (int i = 0; i < n_episodes; ++i) {
    EpisodeTask task = sampler.episode(i);
    ad::Tape tape;
    Model::EpisodeOutput out = model.forward(corpus, task);
    for (size_t q = 0; q < out.labels.size(); ++q) {
      hits += out.predictions[q] == out.labels[q] ? 1 : 0;
      ++total;
    }
  }
  return total > 0 ? double(hits) / double(total) : 0.0;
}

TrainResult meta_train(const GraphCorpus& corpus, const EpisodeSampler& train,
                       const EpisodeSampler* val, Model& model, const TrainConfig& cfg) {
  cfg.validate();
  ParamOptimizer opt(cfg);
  TrainResult result;
  double best_acc = -1.0;
  int rounds_without_improvement = 0;
  bool have_best = false;

  int e = 0;
  for (; e < cfg.episodes; ++e) {
    EpisodeTask task = train.episode(e);
    Model::EpisodeOutput out;
    double loss = 0.0;
    {
      ad::Tape tape;
      try {
        out = model.forward(corpus, task);
      } catch (const NumericError& err) {
        throw NumericError("episode " + std::to_string(e) + ": " + err.what());
      }
      loss = out.loss.scalar_value();
      if (!std::isfinite(loss)) {
        throw NumericError("episode " + std::to_string(e) + ": non-finite loss");
      }
      tape.backward(out.loss);
    }
    opt.step(model.params());
    model.params().zero_grads();
    result.log.push_back({e, loss, 0.0, false});

    if (val && (e + 1) % cfg.val_every == 0) {
      double acc = evaluate_accuracy(corpus, *val, model, cfg.val_episodes);
      result.log.back().val_accuracy = acc;
      result.log.back().has_val = true;
      if (acc > best_acc) {
        best_acc = acc;
        result.best = snapshot_model(model, e + 1, acc);
        have_best = true;
        rounds_without_improvement = 0;
      } else if (cfg.patience > 0 && ++rounds_without_improvement >= cfg.patience) {
        ++e;
        break;
      }
    }
  }
  result.episodes_run = e;
  if (!have_best) {
    result.best = snapshot_model(model, e, -1.0);
  }
  result.best.adam_m = opt.m_state();
  result.best.adam_v = opt.v_state();
  result.best.adam_t = opt.t_state();
  return result;
}

void write_train_log_csv(const std::string& path, const std::vector<TrainLogRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write train log '" + path + "'");
  out << "episode,loss,val_accuracy\n";
  out.precision(17);
  for (const TrainLogRow& r : rows) {
    out << r.episode << ',' << r.loss << ',';
    if (r.has_val) out << r.val_accuracy;
    out << "\n";
  }
  if (!out) throw IoError("write failed for train log '" + path + "'");
}

// ---------------------------------------------------------------------------
// Evaluation with ranked candidate lists

namespace {

struct RankingContext {
  const HeterogeneousGraph* g = nullptr;
  const EmbeddingTable* table = nullptr;
  // relation name -> labeled pairs, for the graph's split relations (the
  // novel relations when evaluating on the test split)
  std::map<std::string, const std::vector<ObjectPair>*> novel;
};

bool pair_in(const std::vector<ObjectPair>& pairs, int a, int b) {
  for (const auto& [u, v] : pairs) {
    if ((u == a && v == b) || (u == b && v == a)) return true;
  }
  return false;
}

}  // namespace

MetricsRow PredictionReport::to_row(const std::string& scenario, const std::string& variant,
                                    uint64_t seed, int k_spt) const {
  MetricsRow r;
  r.scenario = scenario;
  r.variant = variant;
  r.seed = seed;
  r.k_spt = k_spt;
  r.acc = acc;
  r.f1 = f1;
  r.ndcg10 = ndcg10;
  r.ndcg20 = ndcg20;
  r.map10 = map10;
  r.map20 = map20;
  r.prc10 = prc10;
  r.prc20 = prc20;
  r.test_loss = mean_loss;
  r.n_query_items = n_query_items;
  r.n_episodes = int(tasks.size());
  return r;
}

PredictionReport meta_test(const GraphCorpus& corpus, const EmbeddingCache& emb,
                           const ExtractionParams& ex_params, const EpisodeSampler& sampler,
                           const SplitSpec& split, Model& model, const EvalOptions& opts) {
  PredictionReport report;
  std::vector<int> all_preds, all_labels;
  double loss_sum = 0.0;

  int ranked_remaining = opts.ranking_queries;
  std::set<std::pair<std::string, int>> ranked_done;

  std::map<std::string, std::vector<std::string>> split_relations;
  for (const auto& gr : split.graphs) split_relations[gr.graph_id] = gr.relations;

  for (int e = 0; e < opts.episodes; ++e) {
    EpisodeTask task = sampler.episode(e);
    ad::Tape tape;
    Model::EpisodeOutput out = model.forward(corpus, task);

    PredictionReport::TaskResult tr;
    tr.graph_id = task.graph_id;
    tr.relation_names = task.relation_names;
    tr.query_probs = out.query_probs;
    tr.labels = out.labels;
    tr.predictions = out.predictions;
    tr.loss = out.loss.scalar_value();

    const HeterogeneousGraph& g = corpus.graph(task.graph_id);
    std::vector<ad::Tensor> protos = model.compute_prototypes(g, task);
    for (const ad::Tensor& p : protos) tr.prototypes.push_back(p.values());

    loss_sum += tr.loss;
    for (size_t q = 0; q < out.labels.size(); ++q) {
      all_preds.push_back(out.predictions[q]);
      all_labels.push_back(out.labels[q]);
    }

    // Ranked lists for the first ranking_queries distinct query objects.
    if (ranked_remaining > 0) {
      RankingContext ctx;
      ctx.g = &g;
      ctx.table = &emb.table(g.id);
      for (const std::string& name : split_relations[task.graph_id]) {
        ctx.novel[name] = &g.relations.at(name);
      }
      for (const auto& [set, r] : task.query) {
        if (ranked_remaining <= 0) break;
        int q_obj = set->u;
        if (!ranked_done.insert({task.graph_id, q_obj}).second) continue;
        --ranked_remaining;

        // Candidate pool: same-type objects plus every close object; the cap
        // never evicts close objects.
        std::set<int> close_set;
        for (const auto& [name, pairs] : ctx.novel) {
          for (const auto& [a, b] : *pairs) {
            if (a == q_obj) close_set.insert(b);
            if (b == q_obj) close_set.insert(a);
          }
        }
        std::vector<int> pool;
        for (int c = 0; c < g.n_objects(); ++c) {
          if (c == q_obj) continue;
          if (g.object_type(c) == g.object_type(q_obj) || close_set.count(c)) pool.push_back(c);
        }
        if (int(pool.size()) > opts.candidate_cap) {
          std::vector<int> rest;
          std::vector<int> kept;
          for (int c : pool) {
            if (close_set.count(c)) kept.push_back(c);
            else rest.push_back(c);
          }
          Rng rng = Rng::derive(opts.seed, {Rng::key("candidates"), fnv1a(task.graph_id),
                                            uint64_t(uint32_t(q_obj))});
          rng.shuffle(rest);
          int room = std::max(0, opts.candidate_cap - int(kept.size()));
          kept.insert(kept.end(), rest.begin(), rest.begin() + std::min<long>(room, long(rest.size())));
          std::sort(kept.begin(), kept.end());
          pool = std::move(kept);
        }

        // One pair embedding per candidate, reused across the N_rel lists.
        std::vector<double> cand_scores_base;  // placeholder to keep ordering clear
        std::vector<std::vector<double>> cand_emb(pool.size());
        std::vector<char> cand_ok(pool.size(), 0);
        for (size_t ci = 0; ci < pool.size(); ++ci) {
          try {
            SubgraphSet cs = extract_pair(g, *ctx.table, ex_params, q_obj, pool[ci]);
            ad::Tape ctape;
            cand_emb[ci] = model.pair_embedding(g, cs).values();
            cand_ok[ci] = 1;
          } catch (const NoPathError&) {
            // unreachable candidate ranks last
          }
        }
        (void)cand_scores_base;

        std::vector<RankedList> lists;
        for (size_t r_idx = 0; r_idx < task.relation_names.size(); ++r_idx) {
          const std::vector<double>& proto = tr.prototypes[r_idx];
          std::vector<std::pair<double, int>> scored;  // (-score, candidate)
          for (size_t ci = 0; ci < pool.size(); ++ci) {
            double score = -1e300;
            if (cand_ok[ci]) {
              double d = 0.0;
              for (size_t k = 0; k < proto.size(); ++k) {
                double diff = cand_emb[ci][k] - proto[k];
                d += diff * diff;
              }
              score = -d;
            }
            scored.push_back({score, pool[ci]});
          }
          std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
          });
          RankedList rl;
          rl.query_object = q_obj;
          rl.relation_index = int(r_idx);
          const std::vector<ObjectPair>& rel_pairs =
              *ctx.novel.at(task.relation_names[r_idx]);
          for (const auto& [score, c] : scored) {
            rl.candidates.push_back(c);
            rl.relevant.push_back(pair_in(rel_pairs, q_obj, c) ? 1 : 0);
            rl.close.push_back(close_set.count(c) ? 1 : 0);
          }
          lists.push_back(std::move(rl));
        }
        report.ranked.push_back(std::move(lists));
      }
    }
    report.tasks.push_back(std::move(tr));
  }

  report.n_query_items = int(all_labels.size());
  report.acc = accuracy(all_preds, all_labels);
  report.f1 = macro_f1(all_preds, all_labels, sampler.n_rel());
  report.mean_loss = loss_sum / double(opts.episodes);

  // Aggregate ranking metrics over all lists / query objects with enough
  // candidates for each cutoff.
  for (int k : {10, 20}) {
    double ndcg_sum = 0.0, map_sum = 0.0, prc_sum = 0.0;
    int n_lists = 0, n_prc = 0;
    for (const std::vector<RankedList>& lists : report.ranked) {
      bool long_enough = true;
      for (const RankedList& rl : lists) {
        ndcg_sum += ndcg_at_k(rl, k);
        map_sum += map_at_k(rl, k);
        ++n_lists;
        if (int(rl.candidates.size()) < k) long_enough = false;
      }
      if (long_enough) {
        prc_sum += prc_at_k(lists, k);
        ++n_prc;
      }
    }
    double ndcg = n_lists ? ndcg_sum / n_lists : 0.0;
    double map = n_lists ? map_sum / n_lists : 0.0;
    double prc = n_prc ? prc_sum / n_prc : 0.0;
    if (k == 10) {
      report.ndcg10 = ndcg;
      report.map10 = map;
      report.prc10 = prc;
    } else {
      report.ndcg20 = ndcg;
      report.map20 = map;
      report.prc20 = prc;
    }
  }
  return report;
}

}  // namespace metags
