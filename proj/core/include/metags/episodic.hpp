#pragma once

#include <map>
#include <string>
#include <vector>

#include "metags/extract.hpp"
#include "metags/hyperproto.hpp"
#include "metags/metrics.hpp"
#include "metags/twoview.hpp"

namespace metags {

struct TrainConfig {
  int episodes = 2000;
  double learning_rate = 1e-3;
  enum class Optimizer { Adam, Sgd };
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 0;
  int k_spt = 3;
  int k_qry = 10;
  int n_rel = 3;
  Variant variant = Variant::Full;
  int val_every = 100;    // episodes between validation passes
  int val_episodes = 30;  // episodes per validation pass
  int patience = 10;      // validation rounds without improvement; <= 0 disables

  void validate() const;
};

// The assembled two-view + hyper-prototypical model. Forward passes build
// onto the caller's active Tape; parameters live in a named store shared by
// the checkpointing and gradient-check machinery.
class Model {
 public:
  explicit Model(ModelConfig cfg);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  ad::ParamStore& params() { return store_; }
  const ad::ParamStore& params() const { return store_; }
  OvgcParams& ovgc_params() { return ovgc_; }
  GvgcParams& gvgc_params() { return gvgc_; }
  HyperGnnParams& hyper_params() { return hyper_; }

  ad::Tensor embed_subgraph(const HeterogeneousGraph& g, const NormalizedSubgraph& sub);
  // One object pair: pooled hyper-prototypical embedding of its subgraph
  // set (plain mean under the no-hyper variant).
  ad::Tensor pair_embedding(const HeterogeneousGraph& g, const SubgraphSet& set);
  // Per-relation prototypes from the episode's support set.
  std::vector<ad::Tensor> compute_prototypes(const HeterogeneousGraph& g, const EpisodeTask& task);

  struct EpisodeOutput {
    ad::Tensor loss;
    std::vector<std::vector<double>> query_probs;
    std::vector<int> labels;
    std::vector<int> predictions;
  };
  EpisodeOutput forward(const GraphCorpus& corpus, const EpisodeTask& task);

  uint64_t config_fingerprint() const;

 private:
  ModelConfig cfg_;
  ad::ParamStore store_;
  OvgcParams ovgc_;
  GvgcParams gvgc_;
  HyperGnnParams hyper_;
};

// Versioned named-tensor snapshot; reloading reproduces forward passes
// bit-exactly. Optimizer state rides along so training can resume.
struct Checkpoint {
  uint64_t config_fp = 0;
  int episode = 0;
  double best_val_accuracy = -1.0;  // -1 when trained without validation
  std::map<std::string, std::pair<std::vector<int>, std::vector<double>>> tensors;
  std::map<std::string, std::vector<double>> adam_m;
  std::map<std::string, std::vector<double>> adam_v;
  int64_t adam_t = 0;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

Checkpoint snapshot_model(const Model& model, int episode, double val_accuracy);
// Restores tensors into the model (creating lazily-keyed parameters as
// needed). Throws on config fingerprint or shape mismatch.
void restore_model(Model& model, const Checkpoint& ckpt);

// Adam / plain SGD over the parameter store, state keyed by parameter name.
class ParamOptimizer {
 public:
  explicit ParamOptimizer(const TrainConfig& cfg) : cfg_(cfg) {}
  void step(ad::ParamStore& store);

  std::map<std::string, std::vector<double>>& m_state() { return m_; }
  std::map<std::string, std::vector<double>>& v_state() { return v_; }
  int64_t& t_state() { return t_; }

 private:
  TrainConfig cfg_;
  std::map<std::string, std::vector<double>> m_;
  std::map<std::string, std::vector<double>> v_;
  int64_t t_ = 0;
};

struct TrainLogRow {
  int episode = 0;
  double loss = 0;
  double val_accuracy = 0;
  bool has_val = false;
};

struct TrainResult {
  Checkpoint best;
  std::vector<TrainLogRow> log;
  int episodes_run = 0;
};

// Episodic meta-training: per episode, prototypes from the support set, the
// query loss, one optimizer step. Prototypical only; the support set is
// consumed by prototype computation, never by fine-tuning. Returns the
// best-validation checkpoint (final parameters when val is null).
TrainResult meta_train(const GraphCorpus& corpus, const EpisodeSampler& train,
                       const EpisodeSampler* val, Model& model, const TrainConfig& cfg);

void write_train_log_csv(const std::string& path, const std::vector<TrainLogRow>& rows);

// Mean query accuracy over the first n episodes of a stream; parameters are
// read-only.
double evaluate_accuracy(const GraphCorpus& corpus, const EpisodeSampler& sampler, Model& model,
                         int n_episodes);

struct EvalOptions {
  int episodes = 100;
  // Ranked candidate lists are built for this many query objects (0 skips
  // the ranking metrics).
  int ranking_queries = 0;
  int candidate_cap = 100;
  uint64_t seed = 99;
};

struct PredictionReport {
  struct TaskResult {
    std::string graph_id;
    std::vector<std::string> relation_names;
    std::vector<std::vector<double>> prototypes;
    std::vector<std::vector<double>> query_probs;
    std::vector<int> labels;
    std::vector<int> predictions;
    double loss = 0;
  };
  std::vector<TaskResult> tasks;
  // Per ranked query object: its N_rel recommendation lists.
  std::vector<std::vector<RankedList>> ranked;

  double acc = 0;
  double f1 = 0;
  double mean_loss = 0;
  double ndcg10 = 0, ndcg20 = 0, map10 = 0, map20 = 0, prc10 = 0, prc20 = 0;
  int n_query_items = 0;

  MetricsRow to_row(const std::string& scenario, const std::string& variant, uint64_t seed,
                    int k_spt) const;
};

// Frozen-parameter evaluation: per-episode prototypes from the few-shot
// support set, query probabilities, and (optionally) ranked candidate lists
// scored by negative squared distance to each relation prototype. The
// candidate pool of a query object is its same-type objects plus all close
// objects, capped by seeded sampling that always retains the close ones.
PredictionReport meta_test(const GraphCorpus& corpus, const EmbeddingCache& emb,
                           const ExtractionParams& ex_params, const EpisodeSampler& sampler,
                           const SplitSpec& split, Model& model, const EvalOptions& opts);

}  // namespace metags
