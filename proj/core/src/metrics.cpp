#include "metags/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "metags/errors.hpp"

namespace metags {

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.empty()) throw ValidationError("accuracy: empty input");
  if (predictions.size() != labels.size()) {
    throw ValidationError("accuracy: prediction/label length mismatch");
  }
  size_t hits = 0;
  for (size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return double(hits) / double(predictions.size());
}

double macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels,
                int n_classes) {
  if (predictions.empty()) throw ValidationError("macro_f1: empty input");
  if (predictions.size() != labels.size()) {
    throw ValidationError("macro_f1: prediction/label length mismatch");
  }
  if (n_classes < 1) throw ValidationError("macro_f1: n_classes must be >= 1");
  double total = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < predictions.size(); ++i) {
      bool pred_c = predictions[i] == c;
      bool label_c = labels[i] == c;
      if (pred_c && label_c) ++tp;
      if (pred_c && !label_c) ++fp;
      if (!pred_c && label_c) ++fn;
    }
    double precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
    double recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
    double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    total += f1;  // absent class contributes 0
  }
  return total / double(n_classes);
}

double ndcg_at_k(const RankedList& rl, int k) {
  if (k < 1) throw ValidationError("ndcg_at_k: k must be >= 1");
  int total_relevant = 0;
  for (char r : rl.relevant) total_relevant += r ? 1 : 0;
  if (total_relevant == 0) return 0.0;
  double dcg = 0.0;
  int limit = std::min<int>(k, int(rl.candidates.size()));
  for (int i = 0; i < limit; ++i) {
    if (rl.relevant[size_t(i)]) dcg += 1.0 / std::log2(double(i) + 2.0);
  }
  double idcg = 0.0;
  for (int i = 0; i < std::min(k, total_relevant); ++i) idcg += 1.0 / std::log2(double(i) + 2.0);
  return dcg / idcg;
}

double map_at_k(const RankedList& rl, int k) {
  if (k < 1) throw ValidationError("map_at_k: k must be >= 1");
  int total_relevant = 0;
  for (char r : rl.relevant) total_relevant += r ? 1 : 0;
  if (total_relevant == 0) return 0.0;
  double sum = 0.0;
  int seen_relevant = 0;
  int limit = std::min<int>(k, int(rl.candidates.size()));
  for (int i = 0; i < limit; ++i) {
    if (rl.relevant[size_t(i)]) {
      ++seen_relevant;
      sum += double(seen_relevant) / double(i + 1);
    }
  }
  return sum / double(std::min(k, total_relevant));
}

double prc_at_k(const std::vector<RankedList>& lists, int k, bool count_distinct) {
  if (k < 1) throw ValidationError("prc_at_k: k must be >= 1");
  if (lists.empty()) throw ValidationError("prc_at_k: no lists");
  long close_count = 0;
  std::set<int> distinct;
  for (const RankedList& rl : lists) {
    if (int(rl.candidates.size()) < k) {
      throw ValidationError("prc_at_k: list shorter than K");
    }
    for (int i = 0; i < k; ++i) {
      if (!rl.close[size_t(i)]) continue;
      if (count_distinct) {
        distinct.insert(rl.candidates[size_t(i)]);
      } else {
        ++close_count;
      }
    }
  }
  double numer = count_distinct ? double(distinct.size()) : double(close_count);
  return numer / (double(k) * double(lists.size()));
}

// ---------------------------------------------------------------------------
// CSV + table output

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

constexpr const char* kHeader =
    "scenario,variant,seed,k_spt,acc,f1,ndcg10,ndcg20,map10,map20,prc10,prc20,test_loss,"
    "n_query_items,n_episodes";

}  // namespace

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write metrics file '" + path + "'");
  out << kHeader << "\n";
  for (const MetricsRow& r : rows) {
    out << r.scenario << ',' << r.variant << ',' << r.seed << ',' << r.k_spt << ',' << fmt(r.acc)
        << ',' << fmt(r.f1) << ',' << fmt(r.ndcg10) << ',' << fmt(r.ndcg20) << ',' << fmt(r.map10)
        << ',' << fmt(r.map20) << ',' << fmt(r.prc10) << ',' << fmt(r.prc20) << ','
        << fmt(r.test_loss) << ',' << r.n_query_items << ',' << r.n_episodes << "\n";
  }
  if (!out) throw IoError("write failed for metrics file '" + path + "'");
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("metrics file '" + path + "': empty");
  if (line != kHeader) throw ParseError("metrics file '" + path + "': unexpected header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 15) throw ParseError("metrics file '" + path + "': malformed row");
    MetricsRow r;
    try {
      r.scenario = f[0];
      r.variant = f[1];
      r.seed = std::stoull(f[2]);
      r.k_spt = std::stoi(f[3]);
      r.acc = std::stod(f[4]);
      r.f1 = std::stod(f[5]);
      r.ndcg10 = std::stod(f[6]);
      r.ndcg20 = std::stod(f[7]);
      r.map10 = std::stod(f[8]);
      r.map20 = std::stod(f[9]);
      r.prc10 = std::stod(f[10]);
      r.prc20 = std::stod(f[11]);
      r.test_loss = std::stod(f[12]);
      r.n_query_items = std::stoi(f[13]);
      r.n_episodes = std::stoi(f[14]);
    } catch (const std::exception& e) {
      throw ParseError("metrics file '" + path + "': " + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AggregateRow> aggregate_metrics(const std::vector<MetricsRow>& rows) {
  struct Acc {
    std::vector<const MetricsRow*> rows;
  };
  std::map<std::tuple<std::string, std::string, int>, Acc> groups;
  for (const MetricsRow& r : rows) groups[{r.scenario, r.variant, r.k_spt}].rows.push_back(&r);

  auto mean_of = [](const std::vector<const MetricsRow*>& rs, auto field) {
    double s = 0.0;
    for (const MetricsRow* r : rs) s += field(*r);
    return s / double(rs.size());
  };
  auto std_of = [](const std::vector<const MetricsRow*>& rs, auto field, double mean) {
    if (rs.size() < 2) return 0.0;
    double s = 0.0;
    for (const MetricsRow* r : rs) {
      double d = field(*r) - mean;
      s += d * d;
    }
    return std::sqrt(s / double(rs.size() - 1));
  };

  std::vector<AggregateRow> out;
  for (const auto& [key, group] : groups) {
    AggregateRow a;
    a.scenario = std::get<0>(key);
    a.variant = std::get<1>(key);
    a.k_spt = std::get<2>(key);
    a.n_runs = int(group.rows.size());
    auto acc = [](const MetricsRow& r) { return r.acc; };
    auto f1 = [](const MetricsRow& r) { return r.f1; };
    a.acc_mean = mean_of(group.rows, acc);
    a.acc_std = std_of(group.rows, acc, a.acc_mean);
    a.f1_mean = mean_of(group.rows, f1);
    a.f1_std = std_of(group.rows, f1, a.f1_mean);
    a.ndcg10_mean = mean_of(group.rows, [](const MetricsRow& r) { return r.ndcg10; });
    a.ndcg20_mean = mean_of(group.rows, [](const MetricsRow& r) { return r.ndcg20; });
    a.map10_mean = mean_of(group.rows, [](const MetricsRow& r) { return r.map10; });
    a.map20_mean = mean_of(group.rows, [](const MetricsRow& r) { return r.map20; });
    a.prc10_mean = mean_of(group.rows, [](const MetricsRow& r) { return r.prc10; });
    a.prc20_mean = mean_of(group.rows, [](const MetricsRow& r) { return r.prc20; });
    out.push_back(std::move(a));
  }
  return out;
}

std::string format_aggregate_table(const std::vector<AggregateRow>& rows) {
  std::ostringstream s;
  s << std::left << std::setw(26) << "scenario/variant" << std::setw(6) << "K_spt" << std::setw(5)
    << "runs" << std::right << std::setw(16) << "Acc" << std::setw(16) << "F1" << std::setw(9)
    << "NDCG@10" << std::setw(9) << "NDCG@20" << std::setw(9) << "MAP@10" << std::setw(9)
    << "MAP@20" << std::setw(9) << "PRC@10" << std::setw(9) << "PRC@20" << "\n";
  s << std::string(123, '-') << "\n";
  auto pm = [](double mean, double sd) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(4) << mean << "+-" << std::setprecision(3) << sd;
    return o.str();
  };
  auto one = [](double v) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(4) << v;
    return o.str();
  };
  for (const AggregateRow& r : rows) {
    s << std::left << std::setw(26) << (r.scenario + "/" + r.variant) << std::setw(6) << r.k_spt
      << std::setw(5) << r.n_runs << std::right << std::setw(16) << pm(r.acc_mean, r.acc_std)
      << std::setw(16) << pm(r.f1_mean, r.f1_std) << std::setw(9) << one(r.ndcg10_mean)
      << std::setw(9) << one(r.ndcg20_mean) << std::setw(9) << one(r.map10_mean) << std::setw(9)
      << one(r.map20_mean) << std::setw(9) << one(r.prc10_mean) << std::setw(9)
      << one(r.prc20_mean) << "\n";
  }
  return s.str();
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write summary file '" + path + "'");
  out << "scenario,variant,k_spt,n_runs,acc_mean,acc_std,f1_mean,f1_std,ndcg10,ndcg20,map10,"
         "map20,prc10,prc20\n";
  for (const AggregateRow& r : rows) {
    out << r.scenario << ',' << r.variant << ',' << r.k_spt << ',' << r.n_runs << ','
        << fmt(r.acc_mean) << ',' << fmt(r.acc_std) << ',' << fmt(r.f1_mean) << ','
        << fmt(r.f1_std) << ',' << fmt(r.ndcg10_mean) << ',' << fmt(r.ndcg20_mean) << ','
        << fmt(r.map10_mean) << ',' << fmt(r.map20_mean) << ',' << fmt(r.prc10_mean) << ','
        << fmt(r.prc20_mean) << "\n";
  }
  if (!out) throw IoError("write failed for summary file '" + path + "'");
}

}  // namespace metags
