#include "metags/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "metags/errors.hpp"
#include "metags/rng.hpp"

namespace metags {

namespace {

// Expected window co-occurrence counts of the truncated-walk process
// (walks_per_object walks of walk_length nodes from every object, skip-gram
// window). Closed form instead of sampled walks: C[i][j] accumulates, for
// each offset k <= window, the expected number of position pairs (i, j) at
// distance k, which is (expected visits of i with >= k positions left) *
// (P^k)[i][j]. Exact expectations keep graph automorphisms exact in the
// spectrum, which sampling would break.
Eigen::MatrixXd expected_cooccurrence(const HeterogeneousGraph& g, const EmbedParams& params) {
  const int n = g.n_objects();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& nbrs = g.adjacency()[size_t(i)];
    if (nbrs.empty()) continue;
    double w = 1.0 / double(nbrs.size());
    for (int j : nbrs) P(i, j) = w;
  }

  const int L = params.walk_length;
  const int W = std::min(params.window, L - 1);

  // visits[p](i) = expected walks sitting at i after p steps, summed over
  // all start objects; one walk starts per object per round.
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Ones(n);
  std::vector<Eigen::RowVectorXd> visits{r};
  for (int p = 1; p < L; ++p) {
    r = r * P;
    visits.push_back(r);
  }
  // prefix[t] = sum_{p=0..t} visits[p]
  std::vector<Eigen::RowVectorXd> prefix(visits.size());
  for (size_t t = 0; t < visits.size(); ++t) {
    prefix[t] = t == 0 ? visits[0] : Eigen::RowVectorXd(prefix[t - 1] + visits[t]);
  }

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd Pk = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= W; ++k) {
    Pk = Pk * P;
    const Eigen::RowVectorXd& m = prefix[size_t(L - 1 - k)];
    for (int i = 0; i < n; ++i) {
      if (m(i) == 0.0) continue;
      C.row(i) += double(params.walks_per_object) * m(i) * Pk.row(i);
    }
  }
  return 0.5 * (C + C.transpose());
}

Eigen::MatrixXd positive_pmi(const Eigen::MatrixXd& C) {
  const int n = int(C.rows());
  Eigen::VectorXd rows = C.rowwise().sum();
  double total = rows.sum();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  if (total <= 0.0) return M;
  for (int i = 0; i < n; ++i) {
    if (rows(i) <= 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (C(i, j) <= 0.0 || rows(j) <= 0.0) continue;
      double pmi = std::log(C(i, j) * total / (rows(i) * rows(j)));
      if (pmi > 0.0) M(i, j) = pmi;
    }
  }
  return M;
}

}  // namespace

std::string EmbedParams::fingerprint() const {
  std::ostringstream s;
  s << "v1:dim=" << dim << ":seed=" << seed << ":walks=" << walks_per_object
    << ":len=" << walk_length << ":win=" << window;
  return s.str();
}

EmbeddingTable pretrain_embeddings(const HeterogeneousGraph& g, const EmbedParams& params) {
  if (!g.finalized()) throw ValidationError("pretrain_embeddings: graph not finalized");
  if (g.n_objects() < 1) throw ValidationError("pretrain_embeddings: empty graph");
  if (params.dim < 2) throw ConfigError("pretrain_embeddings: dim must be >= 2");

  const int n = g.n_objects();
  const int dim = params.dim;
  EmbeddingTable table;
  table.dim = dim;
  table.vectors.assign(size_t(n), std::vector<double>(size_t(dim), 0.0));

  Eigen::MatrixXd M = positive_pmi(expected_cooccurrence(g, params));
  if (M.cwiseAbs().maxCoeff() == 0.0) return table;  // no co-occurrence signal

  const int d = std::min(dim, n);

  // Orthogonal subspace iteration for the dominant-|eigenvalue| subspace,
  // then one Rayleigh-Ritz diagonalization to pin the basis.
  Rng rng = Rng::derive(params.seed, {Rng::key("embed-init"), fnv1a(g.id)});
  Eigen::MatrixXd Q(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) Q(i, j) = rng.next_normal();
  }
  auto orthonormalize = [&](const Eigen::MatrixXd& Z) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(n, d));
  };
  Q = orthonormalize(Q);

  Eigen::VectorXd prev_ritz = Eigen::VectorXd::Zero(d);
  for (int iter = 0; iter < 1000; ++iter) {
    Q = orthonormalize(M * Q);
    Eigen::MatrixXd B = Q.transpose() * M * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    Eigen::VectorXd ritz = es.eigenvalues();
    double scale = std::max(1e-300, ritz.cwiseAbs().maxCoeff());
    if (iter > 0 && (ritz - prev_ritz).cwiseAbs().maxCoeff() < 1e-14 * scale) {
      break;
    }
    prev_ritz = ritz;
  }

  Eigen::MatrixXd B = Q.transpose() * M * Q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  Eigen::VectorXd evals = es.eigenvalues();
  Eigen::MatrixXd U = Q * es.eigenvectors();

  // Sort by |lambda| descending (ties: larger lambda first) so the retained
  // columns are the dominant spectrum in a deterministic order.
  std::vector<int> order(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) order[size_t(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double fa = std::abs(evals(a));
    double fb = std::abs(evals(b));
    if (fa != fb) return fa > fb;
    return evals(a) > evals(b);
  });

  double lambda_max = std::abs(evals(order[0]));
  for (int col = 0; col < d; ++col) {
    double lambda = evals(order[size_t(col)]);
    // Spectrum exhausted: trailing dimensions stay zero.
    if (std::abs(lambda) <= 1e-12 * lambda_max) break;
    Eigen::VectorXd v = U.col(order[size_t(col)]) * std::sqrt(std::abs(lambda));
    // Sign canonicalization: largest-|entry| coordinate made positive.
    int pivot = 0;
    for (int i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(pivot))) pivot = i;
    }
    if (v(pivot) < 0.0) v = -v;
    for (int i = 0; i < n; ++i) table.vectors[size_t(i)][size_t(col)] = v(i);
  }
  return table;
}

const EmbeddingTable& EmbeddingCache::table(const std::string& graph_id) const {
  auto it = tables.find(graph_id);
  if (it == tables.end()) {
    throw ValidationError("embedding cache has no table for graph '" + graph_id + "'");
  }
  return it->second;
}

EmbeddingCache compute_embeddings(const GraphCorpus& corpus, const EmbedParams& params) {
  EmbeddingCache cache;
  cache.params_fingerprint = params.fingerprint();
  for (const HeterogeneousGraph& g : corpus.graphs) {
    cache.tables[g.id] = pretrain_embeddings(g, params);
  }
  return cache;
}

namespace {

constexpr char kMagic[4] = {'M', 'G', 'E', 'M'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, uint32_t(s.size()));
  out.write(s.data(), long(s.size()));
}
uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
std::string read_str(std::istream& in) {
  uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), long(len));
  return s;
}

}  // namespace

void save_embedding_cache(const EmbeddingCache& cache, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write embedding cache '" + path + "'");
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_str(out, cache.params_fingerprint);
  write_u32(out, uint32_t(cache.tables.size()));
  for (const auto& [gid, table] : cache.tables) {
    write_str(out, gid);
    write_u32(out, uint32_t(table.vectors.size()));
    write_u32(out, uint32_t(table.dim));
    for (const auto& row : table.vectors) {
      out.write(reinterpret_cast<const char*>(row.data()), long(row.size() * sizeof(double)));
    }
  }
  if (!out) throw IoError("write failed for embedding cache '" + path + "'");
}

EmbeddingCache load_embedding_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding cache '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("embedding cache '" + path + "': bad magic");
  }
  uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw ParseError("embedding cache '" + path + "': unsupported version " +
                     std::to_string(version));
  }
  EmbeddingCache cache;
  cache.params_fingerprint = read_str(in);
  uint32_t n_graphs = read_u32(in);
  for (uint32_t gi = 0; gi < n_graphs; ++gi) {
    std::string gid = read_str(in);
    uint32_t n = read_u32(in);
    uint32_t dim = read_u32(in);
    EmbeddingTable table;
    table.dim = int(dim);
    table.vectors.assign(n, std::vector<double>(dim, 0.0));
    for (uint32_t i = 0; i < n; ++i) {
      in.read(reinterpret_cast<char*>(table.vectors[i].data()), long(dim * sizeof(double)));
    }
    cache.tables[gid] = std::move(table);
  }
  if (!in) throw ParseError("embedding cache '" + path + "': truncated file");
  return cache;
}

}  // namespace metags
