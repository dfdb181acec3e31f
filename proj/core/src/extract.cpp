#include "metags/extract.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "binio.hpp"
#include "metags/errors.hpp"
#include "metags/rng.hpp"

namespace metags {

namespace {

constexpr uint64_t kSubgraphKey = 0x73756267ull;
constexpr uint64_t kEpisodeKey = 0x657069736full;

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

void ExtractionParams::validate() const {
  if (k_path < 1) throw ConfigError("extract: k_path must be >= 1");
  if (l_max < 1) throw ConfigError("extract: l_max must be >= 1");
  if (path_cap < 1) throw ConfigError("extract: path_cap must be >= 1");
  if (n_type_min < 2) throw ConfigError("extract: n_type_min must be >= 2");
  if (n_type_max < n_type_min) throw ConfigError("extract: n_type_max must be >= n_type_min");
  if (m < 1) throw ConfigError("extract: m must be >= 1");
}

std::string ExtractionParams::fingerprint() const {
  std::ostringstream s;
  s << "v1:mode=" << (mode == Mode::Paths ? "paths" : "2hop") << ":k=" << k_path
    << ":l=" << l_max << ":cap=" << path_cap << ":nt=" << n_type_min << "-" << n_type_max
    << ":m=" << m << ":seed=" << seed;
  return s.str();
}

double path_score(const HeterogeneousGraph& g, const std::vector<int>& path_objects) {
  if (path_objects.size() < 2) {
    throw ValidationError("path_score: a path needs at least one link");
  }
  std::set<int> types;
  int cross = 0;
  int links = int(path_objects.size()) - 1;
  types.insert(g.object_type(path_objects[0]));
  for (size_t i = 1; i < path_objects.size(); ++i) {
    types.insert(g.object_type(path_objects[i]));
    if (g.object_type(path_objects[i - 1]) != g.object_type(path_objects[i])) ++cross;
  }
  return std::log(double(types.size())) * (double(cross) / double(links));
}

std::vector<ScoredPath> enumerate_paths(const HeterogeneousGraph& g, int u, int v, int l_max,
                                        int cap) {
  if (u == v) throw ValidationError("enumerate_paths: query objects must differ");
  std::vector<ScoredPath> out;
  std::vector<int> path{u};
  std::vector<char> on_path(size_t(g.n_objects()), 0);
  on_path[size_t(u)] = 1;
  bool stopped = false;

  auto dfs = [&](auto&& self, int cur) -> void {
    if (stopped) return;
    int links_used = int(path.size()) - 1;
    for (int nbr : g.adjacency()[size_t(cur)]) {
      if (stopped) return;
      if (nbr == v) {
        if (links_used + 1 <= l_max) {
          path.push_back(v);
          out.push_back({path, path_score(g, path)});
          path.pop_back();
          if (int(out.size()) >= cap) {
            stopped = true;
            return;
          }
        }
        continue;
      }
      if (on_path[size_t(nbr)] || links_used + 2 > l_max) continue;
      on_path[size_t(nbr)] = 1;
      path.push_back(nbr);
      self(self, nbr);
      path.pop_back();
      on_path[size_t(nbr)] = 0;
    }
  };
  dfs(dfs, u);
  return out;
}

namespace {

bool path_order(const ScoredPath& a, const ScoredPath& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.objects.size() != b.objects.size()) return a.objects.size() < b.objects.size();
  return a.objects < b.objects;
}

GraphStructure structure_from_paths(const HeterogeneousGraph& g, int u, int v,
                                    const ExtractionParams& params) {
  std::vector<ScoredPath> paths = enumerate_paths(g, u, v, params.l_max, params.path_cap);
  if (paths.empty()) {
    throw NoPathError("graph '" + g.id + "': pair (" + std::to_string(u) + "," +
                      std::to_string(v) + ") disconnected within " + std::to_string(params.l_max) +
                      " hops");
  }
  std::sort(paths.begin(), paths.end(), path_order);
  size_t keep = std::min(size_t(params.k_path), paths.size());

  std::set<int> objects;
  std::set<Link> links;
  for (size_t p = 0; p < keep; ++p) {
    const std::vector<int>& objs = paths[p].objects;
    objects.insert(objs.begin(), objs.end());
    for (size_t i = 1; i < objs.size(); ++i) {
      int a = objs[i - 1];
      int b = objs[i];
      // every typed link joining the consecutive pair belongs to the
      // structure
      for (const auto& [nbr, t] : g.neighbors(a)) {
        if (nbr == b) links.insert({std::min(a, b), std::max(a, b), t});
      }
    }
  }
  GraphStructure s;
  s.graph_id = g.id;
  s.u = u;
  s.v = v;
  s.objects.assign(objects.begin(), objects.end());
  s.links.assign(links.begin(), links.end());
  return s;
}

GraphStructure structure_from_two_hop(const HeterogeneousGraph& g, int u, int v) {
  std::vector<int> du = bfs_distances(g.adjacency(), u);
  std::vector<int> dv = bfs_distances(g.adjacency(), v);
  std::set<int> objects;
  for (int i = 0; i < g.n_objects(); ++i) {
    bool near_u = du[size_t(i)] >= 0 && du[size_t(i)] <= 2;
    bool near_v = dv[size_t(i)] >= 0 && dv[size_t(i)] <= 2;
    if (near_u || near_v) objects.insert(i);
  }
  objects.insert(u);
  objects.insert(v);
  GraphStructure s;
  s.graph_id = g.id;
  s.u = u;
  s.v = v;
  s.objects.assign(objects.begin(), objects.end());
  for (const Link& l : g.links) {
    if (objects.count(l.src) && objects.count(l.dst)) s.links.push_back(l);
  }
  return s;
}

}  // namespace

GraphStructure extract_structure(const HeterogeneousGraph& g, int u, int v,
                                 const ExtractionParams& params) {
  if (u == v) throw ValidationError("extract_structure: query objects must differ");
  for (int endpoint : {u, v}) {
    if (endpoint < 0 || endpoint >= g.n_objects()) {
      throw ValidationError("extract_structure: unknown object id " + std::to_string(endpoint));
    }
  }
  if (params.mode == ExtractionParams::Mode::TwoHop) return structure_from_two_hop(g, u, v);
  return structure_from_paths(g, u, v, params);
}

std::map<int, std::vector<double>> structure_type_means(const HeterogeneousGraph& g,
                                                        const GraphStructure& s,
                                                        const EmbeddingTable& emb) {
  std::map<int, std::vector<double>> sums;
  std::map<int, int> counts;
  for (int obj : s.objects) {
    int t = g.object_type(obj);
    auto [it, fresh] = sums.try_emplace(t, std::vector<double>(size_t(emb.dim), 0.0));
    const std::vector<double>& e = emb.vec(obj);
    for (size_t k = 0; k < it->second.size(); ++k) it->second[k] += e[k];
    counts[t] += 1;
  }
  for (auto& [t, vec] : sums) {
    double inv = 1.0 / double(counts[t]);
    for (double& x : vec) x *= inv;
  }
  return sums;
}

double type_similarity(const HeterogeneousGraph& g, const GraphStructure& s,
                       const EmbeddingTable& emb, int type_a, int type_b) {
  auto means = structure_type_means(g, s, emb);
  auto ia = means.find(type_a);
  auto ib = means.find(type_b);
  if (ia == means.end() || ib == means.end()) {
    throw ValidationError("type_similarity: type not present in the structure");
  }
  return cosine(ia->second, ib->second);
}

int NormalizedSubgraph::local_index(int obj) const {
  auto it = std::lower_bound(objects.begin(), objects.end(), obj);
  if (it == objects.end() || *it != obj) {
    throw ValidationError("subgraph: unknown object id " + std::to_string(obj));
  }
  return int(it - objects.begin());
}

int NormalizedSubgraph::synthetic_link_count() const {
  int n = 0;
  for (const SubLink& l : links) n += l.synthetic ? 1 : 0;
  return n;
}

void NormalizedSubgraph::finalize_runtime() {
  local_adj.assign(objects.size(), {});
  for (const SubLink& l : links) {
    int a = local_index(l.src);
    int b = local_index(l.dst);
    local_adj[size_t(a)].push_back(b);
    local_adj[size_t(b)].push_back(a);
  }
  for (auto& nbrs : local_adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  dist_u = bfs_distances(local_adj, local_index(u));
  dist_v = bfs_distances(local_adj, local_index(v));
}

int repair_isolated(SubgraphDraft& draft, int synthetic_link_type) {
  std::vector<std::vector<int>> adj(draft.objects.size());
  auto local = [&](int obj) {
    auto it = std::lower_bound(draft.objects.begin(), draft.objects.end(), obj);
    return int(it - draft.objects.begin());
  };
  for (const NormalizedSubgraph::SubLink& l : draft.links) {
    int a = local(l.src);
    int b = local(l.dst);
    adj[size_t(a)].push_back(b);
    adj[size_t(b)].push_back(a);
  }
  int lu = local(draft.u);
  int lv = local(draft.v);
  int added = 0;
  auto add_link = [&](int a, int b) {
    draft.links.push_back({std::min(draft.objects[size_t(a)], draft.objects[size_t(b)]),
                           std::max(draft.objects[size_t(a)], draft.objects[size_t(b)]),
                           synthetic_link_type, true});
    adj[size_t(a)].push_back(b);
    adj[size_t(b)].push_back(a);
    ++added;
  };
  for (;;) {
    std::vector<int> du = bfs_distances(adj, lu);
    std::vector<int> dv = bfs_distances(adj, lv);
    // The query objects are never isolated objects themselves.
    int offender = -1;
    for (size_t i = 0; i < draft.objects.size(); ++i) {
      if (int(i) == lu || int(i) == lv) continue;
      if (du[i] < 0 || dv[i] < 0) {
        offender = int(i);
        break;  // objects are sorted, so this is the lowest id
      }
    }
    if (offender == -1) {
      // Degenerate subgraph with the query pair split and nothing left to
      // route through: connect the pair directly.
      if (du[size_t(lv)] < 0) add_link(lu, lv);
      break;
    }
    // Link to the unreachable query object; to v when it reaches neither,
    // then recheck (the next round links it to u if v's side was also cut
    // off from u).
    int target = du[size_t(offender)] < 0 && dv[size_t(offender)] >= 0 ? lu : lv;
    add_link(offender, target);
  }
  return added;
}

SubgraphSet generate_subgraphs(const HeterogeneousGraph& g, const GraphStructure& s,
                               const EmbeddingTable& emb, const ExtractionParams& params) {
  params.validate();
  auto means = structure_type_means(g, s, emb);

  // Types present in the structure, ascending id, with object counts.
  std::vector<int> types;
  std::vector<int> counts;
  for (const auto& [t, mean] : means) types.push_back(t);
  std::map<int, int> count_map;
  for (int obj : s.objects) count_map[g.object_type(obj)] += 1;
  for (int t : types) counts.push_back(count_map[t]);

  const int type_u = g.object_type(s.u);
  const int type_v = g.object_type(s.v);

  SubgraphSet set;
  set.graph_id = g.id;
  set.u = s.u;
  set.v = s.v;

  for (int n_type = params.n_type_min; n_type <= params.n_type_max; ++n_type) {
    for (int draw = 0; draw < params.m; ++draw) {
      Rng rng = Rng::derive(params.seed, {kSubgraphKey, fnv1a(g.id), uint64_t(uint32_t(s.u)),
                                          uint64_t(uint32_t(s.v)), uint64_t(n_type),
                                          uint64_t(draw)});
      int target = std::min(n_type, int(types.size()));

      std::set<int> selected{type_u, type_v};
      std::vector<int> pool;
      std::vector<double> weights;
      for (size_t i = 0; i < types.size(); ++i) {
        if (!selected.count(types[i])) {
          pool.push_back(types[i]);
          weights.push_back(double(counts[i]));
        }
      }
      while (int(selected.size()) < target && !pool.empty()) {
        size_t pick = rng.weighted_index(weights);
        selected.insert(pool[pick]);
        pool.erase(pool.begin() + long(pick));
        weights.erase(weights.begin() + long(pick));
      }

      SubgraphDraft draft;
      draft.u = s.u;
      draft.v = s.v;
      for (int obj : s.objects) {
        if (selected.count(g.object_type(obj))) draft.objects.push_back(obj);
      }
      for (const Link& l : s.links) {
        if (selected.count(g.object_type(l.src)) && selected.count(g.object_type(l.dst))) {
          draft.links.push_back({l.src, l.dst, l.type_id, false});
        }
      }
      repair_isolated(draft, g.synthetic_link_type());

      // Rank slots: summed similarity to the query types, descending; ties
      // by type name ascending.
      std::vector<int> ordered(selected.begin(), selected.end());
      std::vector<double> score(ordered.size());
      for (size_t i = 0; i < ordered.size(); ++i) {
        score[i] = cosine(means.at(ordered[i]), means.at(type_u)) +
                   cosine(means.at(ordered[i]), means.at(type_v));
      }
      std::vector<size_t> perm(ordered.size());
      for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      std::sort(perm.begin(), perm.end(), [&](size_t a, size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return g.object_types[size_t(ordered[a])] < g.object_types[size_t(ordered[b])];
      });

      NormalizedSubgraph sub;
      sub.u = s.u;
      sub.v = s.v;
      sub.objects = draft.objects;
      sub.links = draft.links;
      for (size_t i = 0; i < perm.size(); ++i) sub.selected_types.push_back(ordered[perm[i]]);
      std::map<int, int> rank_of;
      for (size_t k = 0; k < sub.selected_types.size(); ++k) {
        rank_of[sub.selected_types[k]] = int(k) + 1;
      }
      sub.slot.reserve(sub.objects.size());
      for (int obj : sub.objects) sub.slot.push_back(rank_of.at(g.object_type(obj)));
      sub.finalize_runtime();
      set.subgraphs.push_back(std::move(sub));
    }
  }
  return set;
}

SubgraphSet extract_pair(const HeterogeneousGraph& g, const EmbeddingTable& emb,
                         const ExtractionParams& params, int u, int v) {
  GraphStructure s = extract_structure(g, u, v, params);
  return generate_subgraphs(g, s, emb, params);
}

// ---------------------------------------------------------------------------
// ExtractionCache

ExtractionCache ExtractionCache::build(const GraphCorpus& corpus, const EmbeddingCache& emb,
                                       const ExtractionParams& params, int jobs) {
  params.validate();
  ExtractionCache cache;
  cache.corpus_hash_ = corpus_content_hash(corpus);
  cache.params_fp_ = params.fingerprint();

  struct Task {
    const HeterogeneousGraph* g;
    const EmbeddingTable* table;
    int u, v;
  };
  std::vector<Task> tasks;
  std::set<std::tuple<std::string, int, int>> seen;
  for (const HeterogeneousGraph& g : corpus.graphs) {
    const EmbeddingTable& table = emb.table(g.id);
    for (const auto& [name, pairs] : g.relations) {
      for (const auto& [u, v] : pairs) {
        if (seen.insert({g.id, u, v}).second) tasks.push_back({&g, &table, u, v});
      }
    }
  }

  std::vector<std::optional<SubgraphSet>> results(tasks.size());
  std::vector<std::string> failures(tasks.size());
  auto run_range = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      const Task& t = tasks[i];
      try {
        results[i] = extract_pair(*t.g, *t.table, params, t.u, t.v);
      } catch (const NoPathError& e) {
        failures[i] = e.what();
      }
    }
  };
  int n_jobs = std::max(1, jobs);
  if (n_jobs == 1 || tasks.size() < 2) {
    run_range(0, tasks.size());
  } else {
    std::vector<std::thread> threads;
    size_t chunk = (tasks.size() + size_t(n_jobs) - 1) / size_t(n_jobs);
    for (int j = 0; j < n_jobs; ++j) {
      size_t lo = size_t(j) * chunk;
      size_t hi = std::min(tasks.size(), lo + chunk);
      if (lo >= hi) break;
      threads.emplace_back(run_range, lo, hi);
    }
    for (std::thread& t : threads) t.join();
  }

  for (size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    if (results[i]) {
      cache.sets_[{t.g->id, t.u, t.v}] = std::move(*results[i]);
    } else {
      cache.skipped_.push_back({t.g->id, t.u, t.v, failures[i]});
    }
  }
  return cache;
}

const SubgraphSet* ExtractionCache::find(const std::string& graph_id, int u, int v) const {
  auto it = sets_.find({graph_id, u, v});
  return it == sets_.end() ? nullptr : &it->second;
}

namespace {

constexpr char kCacheMagic[4] = {'M', 'G', 'E', 'C'};
constexpr uint32_t kCacheVersion = 1;

void write_subgraph(std::ostream& out, const NormalizedSubgraph& sub) {
  using namespace detail;
  write_i32(out, sub.u);
  write_i32(out, sub.v);
  write_i32v(out, sub.objects);
  write_i32v(out, sub.slot);
  write_i32v(out, sub.selected_types);
  write_u32(out, uint32_t(sub.links.size()));
  for (const auto& l : sub.links) {
    write_i32(out, l.src);
    write_i32(out, l.dst);
    write_i32(out, l.type_id);
    out.put(l.synthetic ? 1 : 0);
  }
}

NormalizedSubgraph read_subgraph(std::istream& in) {
  using namespace detail;
  NormalizedSubgraph sub;
  sub.u = read_i32(in);
  sub.v = read_i32(in);
  sub.objects = read_i32v(in);
  sub.slot = read_i32v(in);
  sub.selected_types = read_i32v(in);
  uint32_t n_links = read_u32(in);
  sub.links.resize(n_links);
  for (uint32_t i = 0; i < n_links; ++i) {
    sub.links[i].src = read_i32(in);
    sub.links[i].dst = read_i32(in);
    sub.links[i].type_id = read_i32(in);
    sub.links[i].synthetic = in.get() != 0;
  }
  sub.finalize_runtime();
  return sub;
}

}  // namespace

void ExtractionCache::save(const std::string& path) const {
  using namespace detail;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write episode cache '" + path + "'");
  out.write(kCacheMagic, 4);
  write_u32(out, kCacheVersion);
  write_u64(out, corpus_hash_);
  write_str(out, params_fp_);
  write_u32(out, uint32_t(sets_.size()));
  for (const auto& [key, set] : sets_) {
    write_str(out, std::get<0>(key));
    write_i32(out, std::get<1>(key));
    write_i32(out, std::get<2>(key));
    write_u32(out, uint32_t(set.subgraphs.size()));
    for (const NormalizedSubgraph& sub : set.subgraphs) write_subgraph(out, sub);
  }
  write_u32(out, uint32_t(skipped_.size()));
  for (const SkippedPair& s : skipped_) {
    write_str(out, s.graph_id);
    write_i32(out, s.u);
    write_i32(out, s.v);
    write_str(out, s.reason);
  }
  if (!out) throw IoError("write failed for episode cache '" + path + "'");
}

ExtractionCache ExtractionCache::load(const std::string& path, uint64_t expect_corpus_hash,
                                      const std::string& expect_params_fp) {
  using namespace detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open episode cache '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw ParseError("episode cache '" + path + "': bad magic");
  }
  if (read_u32(in) != kCacheVersion) {
    throw ParseError("episode cache '" + path + "': unsupported version");
  }
  ExtractionCache cache;
  cache.corpus_hash_ = read_u64(in);
  cache.params_fp_ = read_str(in);
  if (cache.corpus_hash_ != expect_corpus_hash) {
    throw ValidationError("episode cache '" + path + "': corpus hash mismatch (stale cache?)");
  }
  if (cache.params_fp_ != expect_params_fp) {
    throw ValidationError("episode cache '" + path + "': extraction params mismatch: cache has '" +
                          cache.params_fp_ + "', expected '" + expect_params_fp + "'");
  }
  uint32_t n_sets = read_u32(in);
  for (uint32_t i = 0; i < n_sets; ++i) {
    std::string gid = read_str(in);
    int u = read_i32(in);
    int v = read_i32(in);
    SubgraphSet set;
    set.graph_id = gid;
    set.u = u;
    set.v = v;
    uint32_t n_subs = read_u32(in);
    for (uint32_t k = 0; k < n_subs; ++k) set.subgraphs.push_back(read_subgraph(in));
    cache.sets_[{gid, u, v}] = std::move(set);
  }
  uint32_t n_skipped = read_u32(in);
  for (uint32_t i = 0; i < n_skipped; ++i) {
    SkippedPair s;
    s.graph_id = read_str(in);
    s.u = read_i32(in);
    s.v = read_i32(in);
    s.reason = read_str(in);
    cache.skipped_.push_back(std::move(s));
  }
  if (!in) throw ParseError("episode cache '" + path + "': truncated file");
  return cache;
}

// ---------------------------------------------------------------------------
// Episode sampling

EpisodeSampler::EpisodeSampler(const GraphCorpus& corpus, const ExtractionCache& cache,
                               SplitSpec split, int n_rel, int k_spt, int k_qry, uint64_t seed)
    : cache_(&cache), n_rel_(n_rel), k_spt_(k_spt), k_qry_(k_qry), seed_(seed) {
  if (n_rel < 1 || k_spt < 1 || k_qry < 1) {
    throw ConfigError("episode sampler: N_rel, K_spt and K_qry must be >= 1");
  }
  const int need = k_spt + k_qry;
  for (const SplitSpec::GraphRelations& gr : split.graphs) {
    const HeterogeneousGraph& g = corpus.graph(gr.graph_id);
    GraphEntry entry;
    entry.graph_id = gr.graph_id;
    std::string shortfall;
    for (const std::string& name : gr.relations) {
      auto it = g.relations.find(name);
      if (it == g.relations.end()) {
        throw ValidationError("graph '" + g.id + "' has no relation '" + name + "'");
      }
      RelationPairs rp;
      rp.name = name;
      for (const ObjectPair& pair : it->second) {
        if (cache.find(g.id, pair.first, pair.second)) rp.pairs.push_back(pair);
      }
      if (int(rp.pairs.size()) >= need) {
        entry.relations.push_back(std::move(rp));
      } else if (shortfall.empty()) {
        shortfall = "relation '" + name + "' has only " + std::to_string(rp.pairs.size()) +
                    " extractable pairs (need " + std::to_string(need) + ")";
      }
    }
    if (int(entry.relations.size()) < n_rel_) {
      std::string msg = "graph '" + g.id + "': only " + std::to_string(entry.relations.size()) +
                        " of the split's relations have >= " + std::to_string(need) +
                        " extractable pairs (need N_rel = " + std::to_string(n_rel_) + ")";
      if (!shortfall.empty()) msg += "; " + shortfall;
      throw InsufficientDataError(msg);
    }
    graphs_.push_back(std::move(entry));
  }
  if (graphs_.empty()) throw InsufficientDataError("episode sampler: empty split");
}

EpisodeTask EpisodeSampler::episode(int index) const {
  Rng rng = Rng::derive(seed_, {kEpisodeKey, uint64_t(index)});
  const GraphEntry& entry = graphs_[size_t(rng.next_below(graphs_.size()))];

  std::vector<int> rel_order(entry.relations.size());
  for (size_t i = 0; i < rel_order.size(); ++i) rel_order[i] = int(i);
  rng.shuffle(rel_order);

  EpisodeTask task;
  task.graph_id = entry.graph_id;
  for (int r = 0; r < n_rel_; ++r) {
    const RelationPairs& rp = entry.relations[size_t(rel_order[size_t(r)])];
    task.relation_names.push_back(rp.name);
    std::vector<int> pair_order(rp.pairs.size());
    for (size_t i = 0; i < pair_order.size(); ++i) pair_order[i] = int(i);
    rng.shuffle(pair_order);
    for (int s = 0; s < k_spt_; ++s) {
      const ObjectPair& p = rp.pairs[size_t(pair_order[size_t(s)])];
      task.support.push_back({cache_->find(entry.graph_id, p.first, p.second), r});
    }
    for (int q = 0; q < k_qry_; ++q) {
      const ObjectPair& p = rp.pairs[size_t(pair_order[size_t(k_spt_ + q)])];
      task.query.push_back({cache_->find(entry.graph_id, p.first, p.second), r});
    }
  }
  return task;
}

std::vector<EpisodeTask> build_episodes(const EpisodeSampler& sampler, int n_episodes) {
  std::vector<EpisodeTask> out;
  out.reserve(size_t(n_episodes));
  for (int i = 0; i < n_episodes; ++i) out.push_back(sampler.episode(i));
  return out;
}

}  // namespace metags
