#include "metags/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metags/errors.hpp"
#include "metags/rng.hpp"

namespace metags {

namespace {

std::string locus(const std::string& graph_id, const std::string& what) {
  return "graph '" + graph_id + "': " + what;
}

}  // namespace

void HeterogeneousGraph::finalize() {
  if (finalized_) return;
  const int n_types = int(object_types.size());
  const int n_ltypes = int(link_types.size());

  if (n_types + n_ltypes <= 2) {
    throw ValidationError(locus(id, "heterogeneity condition violated: |A| + |R| = " +
                                        std::to_string(n_types + n_ltypes) + " <= 2"));
  }

  // Dense unique ids; reorder storage so position == id.
  const int n = int(objects.size());
  std::vector<int> position(size_t(n), -1);
  for (const ObjectRecord& o : objects) {
    if (o.id < 0 || o.id >= n) {
      throw ValidationError(locus(id, "object id " + std::to_string(o.id) +
                                          " outside dense range [0, " + std::to_string(n) + ")"));
    }
    if (position[size_t(o.id)] != -1) {
      throw ValidationError(locus(id, "duplicate object id " + std::to_string(o.id)));
    }
    position[size_t(o.id)] = 1;
    if (o.type_id < 0 || o.type_id >= n_types) {
      throw ValidationError(locus(id, "object " + std::to_string(o.id) + " has unknown type id " +
                                          std::to_string(o.type_id)));
    }
  }
  std::sort(objects.begin(), objects.end(),
            [](const ObjectRecord& a, const ObjectRecord& b) { return a.id < b.id; });

  // Canonicalize links: undirected, src < dst. A link listed in both
  // orientations is directed input and collapses to one undirected link;
  // the same orientation twice is a duplicate.
  std::map<Link, int> seen;  // canonical -> orientation bitmask
  for (const Link& raw : links) {
    if (raw.src == raw.dst) {
      throw ValidationError(locus(id, "self-loop on object " + std::to_string(raw.src)));
    }
    for (int endpoint : {raw.src, raw.dst}) {
      if (endpoint < 0 || endpoint >= n) {
        throw ValidationError(locus(id, "link (" + std::to_string(raw.src) + "," +
                                            std::to_string(raw.dst) +
                                            ") references unknown object id " +
                                            std::to_string(endpoint)));
      }
    }
    if (raw.type_id < 0 || raw.type_id >= n_ltypes) {
      throw ValidationError(locus(id, "link (" + std::to_string(raw.src) + "," +
                                          std::to_string(raw.dst) + ") has unknown link type id " +
                                          std::to_string(raw.type_id)));
    }
    Link canon{std::min(raw.src, raw.dst), std::max(raw.src, raw.dst), raw.type_id};
    int orient = raw.src < raw.dst ? 1 : 2;
    int& mask = seen[canon];
    if (mask & orient) {
      throw ValidationError(locus(id, "duplicate link (" + std::to_string(raw.src) + "," +
                                          std::to_string(raw.dst) + "," +
                                          std::to_string(raw.type_id) + ")"));
    }
    mask |= orient;
  }
  links.clear();
  links.reserve(seen.size());
  for (const auto& [canon, mask] : seen) links.push_back(canon);

  // Per-type feature dimension consistency; synthesize for featureless types.
  std::vector<int> type_dim(size_t(n_types), -1);
  for (const ObjectRecord& o : objects) {
    int d = int(o.feature.size());
    int& expect = type_dim[size_t(o.type_id)];
    if (expect == -1) {
      expect = d;
    } else if (expect != d) {
      throw ValidationError(locus(id, "objects of type '" + object_types[size_t(o.type_id)] +
                                          "' carry features of different dimensions (" +
                                          std::to_string(expect) + " vs " + std::to_string(d) +
                                          ")"));
    }
  }

  adj_.assign(size_t(n), {});
  plain_adj_.assign(size_t(n), {});
  for (const Link& l : links) {
    adj_[size_t(l.src)].push_back({l.dst, l.type_id});
    adj_[size_t(l.dst)].push_back({l.src, l.type_id});
  }
  int max_degree = 1;
  for (int i = 0; i < n; ++i) {
    std::sort(adj_[size_t(i)].begin(), adj_[size_t(i)].end());
    max_degree = std::max(max_degree, int(adj_[size_t(i)].size()));
    int prev = -1;
    for (const auto& [nbr, t] : adj_[size_t(i)]) {
      if (nbr != prev) plain_adj_[size_t(i)].push_back(nbr);
      prev = nbr;
    }
  }

  // A type with no features gets x_i = one-hot(type) ++ [normalized degree].
  for (ObjectRecord& o : objects) {
    if (type_dim[size_t(o.type_id)] == 0) {
      o.feature.assign(size_t(n_types) + 1, 0.0);
      o.feature[size_t(o.type_id)] = 1.0;
      o.feature.back() = double(adj_[size_t(o.id)].size()) / double(max_degree);
    }
  }

  // Relation labels refer to existing objects and carry no unordered
  // duplicates; an empty class is a labeling bug upstream.
  for (const auto& [name, pairs] : relations) {
    if (pairs.empty()) {
      throw ValidationError(locus(id, "empty relation class '" + name + "'"));
    }
    std::set<ObjectPair> dedupe;
    for (const auto& [u, v] : pairs) {
      for (int endpoint : {u, v}) {
        if (endpoint < 0 || endpoint >= n) {
          throw ValidationError(locus(id, "relation '" + name + "' references unknown object id " +
                                              std::to_string(endpoint)));
        }
      }
      if (u == v) {
        throw ValidationError(locus(id, "relation '" + name + "' pairs object " +
                                            std::to_string(u) + " with itself"));
      }
      ObjectPair canon{std::min(u, v), std::max(u, v)};
      if (!dedupe.insert(canon).second) {
        throw ValidationError(locus(id, "relation '" + name + "' lists pair (" +
                                            std::to_string(u) + "," + std::to_string(v) +
                                            ") more than once"));
      }
    }
  }

  finalized_ = true;
}

const std::vector<std::pair<int, int>>& HeterogeneousGraph::neighbors(int obj) const {
  if (obj < 0 || obj >= n_objects()) {
    throw ValidationError(locus(id, "unknown object id " + std::to_string(obj)));
  }
  return adj_[size_t(obj)];
}

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int src) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> queue;
  dist[size_t(src)] = 0;
  queue.push_back(src);
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (int nbr : adj[size_t(cur)]) {
      if (dist[size_t(nbr)] == -1) {
        dist[size_t(nbr)] = dist[size_t(cur)] + 1;
        queue.push_back(nbr);
      }
    }
  }
  return dist;
}

std::optional<int> shortest_distance(const HeterogeneousGraph& g, int a, int b) {
  for (int endpoint : {a, b}) {
    if (endpoint < 0 || endpoint >= g.n_objects()) {
      throw ValidationError("unknown object id " + std::to_string(endpoint));
    }
  }
  if (a == b) return 0;
  std::vector<int> dist = bfs_distances(g.adjacency(), a);
  if (dist[size_t(b)] < 0) return std::nullopt;
  return dist[size_t(b)];
}

void GraphCorpus::validate() const {
  std::set<std::string> ids;
  for (const HeterogeneousGraph& g : graphs) {
    if (!ids.insert(g.id).second) {
      throw ValidationError("duplicate graph id '" + g.id + "'");
    }
  }
  auto check_split = [&](const std::vector<std::string>& split, const char* name) {
    std::set<std::string> seen;
    for (const std::string& gid : split) {
      if (!ids.count(gid)) {
        throw ValidationError(std::string("split '") + name + "' references unknown graph id '" +
                              gid + "'");
      }
      if (!seen.insert(gid).second) {
        throw ValidationError(std::string("split '") + name + "' lists graph id '" + gid +
                              "' twice");
      }
    }
  };
  check_split(train_ids, "train");
  check_split(val_ids, "val");
  check_split(test_ids, "test");
  for (const std::string& gid : train_ids) {
    if (std::count(test_ids.begin(), test_ids.end(), gid) ||
        std::count(val_ids.begin(), val_ids.end(), gid)) {
      throw ValidationError("graph id '" + gid + "' appears in more than one split");
    }
  }
  for (const std::string& gid : val_ids) {
    if (std::count(test_ids.begin(), test_ids.end(), gid)) {
      throw ValidationError("graph id '" + gid + "' appears in more than one split");
    }
  }

  // Y_base and Y_novel must be disjoint name sets.
  std::set<std::string> base_names;
  for (const std::string& gid : train_ids) {
    for (const auto& [name, pairs] : graph(gid).relations) base_names.insert(name);
  }
  for (const std::string& gid : test_ids) {
    for (const auto& [name, pairs] : graph(gid).relations) {
      if (base_names.count(name)) {
        throw ValidationError("relation '" + name + "' appears in both train and test splits");
      }
    }
  }
}

const HeterogeneousGraph& GraphCorpus::graph(const std::string& graph_id) const {
  for (const HeterogeneousGraph& g : graphs) {
    if (g.id == graph_id) return g;
  }
  throw ValidationError("unknown graph id '" + graph_id + "'");
}

std::vector<const HeterogeneousGraph*> GraphCorpus::split_graphs(
    const std::vector<std::string>& ids) const {
  std::vector<const HeterogeneousGraph*> out;
  out.reserve(ids.size());
  for (const std::string& gid : ids) out.push_back(&graph(gid));
  return out;
}

namespace {

using json = nlohmann::ordered_json;

json graph_to_json(const HeterogeneousGraph& g) {
  json jg;
  jg["id"] = g.id;
  jg["object_types"] = g.object_types;
  jg["link_types"] = g.link_types;
  json objs = json::array();
  for (const ObjectRecord& o : g.objects) {
    objs.push_back({{"id", o.id}, {"type", o.type_id}, {"feature", o.feature}});
  }
  jg["objects"] = std::move(objs);
  json lks = json::array();
  for (const Link& l : g.links) lks.push_back({l.src, l.dst, l.type_id});
  jg["links"] = std::move(lks);
  json rels = json::object();
  for (const auto& [name, pairs] : g.relations) {
    json jp = json::array();
    for (const auto& [u, v] : pairs) jp.push_back({u, v});
    rels[name] = std::move(jp);
  }
  jg["relations"] = std::move(rels);
  return jg;
}

HeterogeneousGraph graph_from_json(const json& jg, const std::string& where) {
  HeterogeneousGraph g;
  try {
    g.id = jg.at("id").get<std::string>();
    g.object_types = jg.at("object_types").get<std::vector<std::string>>();
    g.link_types = jg.at("link_types").get<std::vector<std::string>>();
    for (const json& jo : jg.at("objects")) {
      ObjectRecord o;
      o.id = jo.at("id").get<int>();
      o.type_id = jo.at("type").get<int>();
      o.feature = jo.at("feature").get<std::vector<double>>();
      g.objects.push_back(std::move(o));
    }
    for (const json& jl : jg.at("links")) {
      if (!jl.is_array() || jl.size() != 3) {
        throw ParseError(where + ": graph '" + g.id + "': link record must be [src,dst,type]");
      }
      g.links.push_back({jl[0].get<int>(), jl[1].get<int>(), jl[2].get<int>()});
    }
    for (const auto& [name, jpairs] : jg.at("relations").items()) {
      std::vector<ObjectPair>& pairs = g.relations[name];
      for (const json& jp : jpairs) {
        if (!jp.is_array() || jp.size() != 2) {
          throw ParseError(where + ": graph '" + g.id + "': relation '" + name +
                           "' entry must be [u,v]");
        }
        pairs.push_back({jp[0].get<int>(), jp[1].get<int>()});
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(where + ": graph record: " + e.what());
  }
  g.finalize();
  return g;
}

}  // namespace

GraphCorpus corpus_from_json(std::string_view text, const std::string& where) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": " + e.what());
  }
  GraphCorpus corpus;
  try {
    for (const json& jg : doc.at("graphs")) {
      corpus.graphs.push_back(graph_from_json(jg, where));
    }
    const json& split = doc.at("split");
    corpus.train_ids = split.at("train").get<std::vector<std::string>>();
    corpus.val_ids = split.value("val", std::vector<std::string>{});
    corpus.test_ids = split.at("test").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  corpus.validate();
  return corpus;
}

std::string corpus_to_json(const GraphCorpus& corpus) {
  json doc;
  json jgs = json::array();
  for (const HeterogeneousGraph& g : corpus.graphs) jgs.push_back(graph_to_json(g));
  doc["graphs"] = std::move(jgs);
  doc["split"] = {{"train", corpus.train_ids}, {"val", corpus.val_ids}, {"test", corpus.test_ids}};
  return doc.dump();
}

GraphCorpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return corpus_from_json(buf.str(), path);
}

void save_corpus(const GraphCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write corpus file '" + path + "'");
  out << corpus_to_json(corpus);
  if (!out) throw IoError("write failed for corpus file '" + path + "'");
}

uint64_t corpus_content_hash(const GraphCorpus& corpus) {
  return fnv1a(corpus_to_json(corpus));
}

}  // namespace metags
