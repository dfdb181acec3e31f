#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace metags {

// One recommendation list: candidates for (query object, relation), best
// score first. `relevant` marks candidates holding THIS relation with the
// query object; `close` marks candidates holding ANY novel relation with it.
struct RankedList {
  int query_object = -1;
  int relation_index = -1;
  std::vector<int> candidates;
  std::vector<char> relevant;
  std::vector<char> close;
};

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Unweighted mean of per-class F1 over all n_classes classes; a class absent
// from both predictions and labels contributes 0.
double macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels,
                int n_classes);

// Binary-relevance NDCG with log2 discounting and ideal-DCG normalization;
// 0 when the list holds no relevant candidate.
double ndcg_at_k(const RankedList& rl, int k);

// Mean precision@i over relevant positions i <= k, divided by
// min(k, total relevant); 0 when nothing is relevant.
double map_at_k(const RankedList& rl, int k);

// Close-object precision over one query object's N_rel lists:
// #close entries in the top k of all lists / (k * N_rel). Counts
// per occurrence across lists; count_distinct switches to counting each
// close object once.
double prc_at_k(const std::vector<RankedList>& lists, int k, bool count_distinct = false);

// One evaluation run's summary row.
struct MetricsRow {
  std::string scenario;
  std::string variant;
  uint64_t seed = 0;
  int k_spt = 0;
  double acc = 0, f1 = 0;
  double ndcg10 = 0, ndcg20 = 0, map10 = 0, map20 = 0, prc10 = 0, prc20 = 0;
  double test_loss = 0;
  int n_query_items = 0;
  int n_episodes = 0;
};

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

// Per (scenario, variant, k_spt) aggregate over runs: mean and std.
struct AggregateRow {
  std::string scenario;
  std::string variant;
  int k_spt = 0;
  int n_runs = 0;
  double acc_mean = 0, acc_std = 0;
  double f1_mean = 0, f1_std = 0;
  double ndcg10_mean = 0, ndcg20_mean = 0;
  double map10_mean = 0, map20_mean = 0;
  double prc10_mean = 0, prc20_mean = 0;
};

std::vector<AggregateRow> aggregate_metrics(const std::vector<MetricsRow>& rows);
std::string format_aggregate_table(const std::vector<AggregateRow>& rows);
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows);

}  // namespace metags
