#include "cldg/temporal_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace cldg {

void TimespanFeatures::set_override(int span, Index node, Eigen::VectorXd row) {
  if (span < 0 || span >= num_spans_)
    throw DataError("span override: span index out of range");
  overrides_[{span, node}] = std::move(row);
}

const Eigen::VectorXd* TimespanFeatures::find(int span, Index node) const {
  auto it = overrides_.find({span, node});
  return it == overrides_.end() ? nullptr : &it->second;
}

double TemporalGraph::min_ts() const {
  if (edges.empty()) throw DataError("graph has no edges");
  double m = edges.front().ts;
  for (const auto& e : edges) m = std::min(m, e.ts);
  return m;
}

double TemporalGraph::max_ts() const {
  if (edges.empty()) throw DataError("graph has no edges");
  double m = edges.front().ts;
  for (const auto& e : edges) m = std::max(m, e.ts);
  return m;
}

std::vector<Index> TemporalGraph::degrees() const {
  std::vector<Index> deg(static_cast<std::size_t>(num_nodes), 0);
  for (const auto& e : edges) {
    ++deg[static_cast<std::size_t>(e.src)];
    ++deg[static_cast<std::size_t>(e.dst)];
  }
  return deg;
}

void TemporalGraph::validate() const {
  if (num_nodes <= 0) throw DataError("graph has no nodes");
  if (edges.empty()) throw DataError("graph has no edges");
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes)
      throw DataError("edge endpoint out of range");
    if (!std::isfinite(e.ts)) throw DataError("non-finite edge timestamp");
  }
  if (timespan() <= 0.0)
    throw DataError("graph timespan is zero; need at least two distinct timestamps");
  if (features && features->rows() != num_nodes)
    throw DataError("feature row count does not match node count");
  if (labels && labels->size() != static_cast<std::size_t>(num_nodes))
    throw DataError("label count does not match node count");
  if (!node_names.empty() && node_names.size() != static_cast<std::size_t>(num_nodes))
    throw DataError("node name count does not match node count");
  if (span_features) {
    if (!features) throw DataError("span feature overrides require a feature matrix");
    for (const auto& [key, row] : span_features->overrides()) {
      if (key.second < 0 || key.second >= num_nodes)
        throw DataError("span override node out of range");
      if (row.size() != features->cols())
        throw DataError("span override width does not match feature matrix");
    }
  }
}

namespace {

// Splits a line on tabs/commas/spaces into trimmed tokens.
std::vector<std::string> tokenize(const std::string& line) {
  std::string norm = line;
  for (char& c : norm)
    if (c == '\t' || c == ',') c = ' ';
  std::istringstream iss(norm);
  std::vector<std::string> toks;
  std::string t;
  while (iss >> t) toks.push_back(t);
  return toks;
}

double parse_double(const std::string& tok, const std::string& where) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": cannot parse number '" + tok + "'");
  }
  if (pos != tok.size()) throw DataError(where + ": trailing characters in number '" + tok + "'");
  return v;
}

std::string line_tag(const std::filesystem::path& p, std::size_t lineno) {
  return p.filename().string() + ":" + std::to_string(lineno);
}

}  // namespace

TemporalGraph ingest_edge_list(const std::filesystem::path& edge_path,
                               const std::optional<std::filesystem::path>& feature_path,
                               const std::optional<std::filesystem::path>& label_path) {
  std::ifstream in(edge_path);
  if (!in) throw DataError("cannot open edge file: " + edge_path.string());

  TemporalGraph g;
  std::unordered_map<std::string, Index> ids;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, g.num_nodes);
    if (inserted) {
      ++g.num_nodes;
      g.node_names.push_back(name);
    }
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = tokenize(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks.size() != 3)
      throw DataError(line_tag(edge_path, lineno) + ": expected 'src dst ts', got " +
                      std::to_string(toks.size()) + " fields");
    double ts = parse_double(toks[2], line_tag(edge_path, lineno));
    if (!std::isfinite(ts))
      throw DataError(line_tag(edge_path, lineno) + ": non-finite timestamp");
    Index s = intern(toks[0]);
    Index d = intern(toks[1]);
    g.edges.push_back({s, d, ts});
  }
  if (g.edges.empty()) throw DataError("edge file has no edges: " + edge_path.string());

  if (feature_path) {
    std::ifstream fin(*feature_path);
    if (!fin) throw DataError("cannot open feature file: " + feature_path->string());
    std::vector<std::vector<double>> rows;
    lineno = 0;
    while (std::getline(fin, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto toks = tokenize(line);
      if (toks.empty() || toks[0][0] == '#') continue;
      std::vector<double> row;
      row.reserve(toks.size());
      for (const auto& t : toks) row.push_back(parse_double(t, line_tag(*feature_path, lineno)));
      if (!rows.empty() && row.size() != rows.front().size())
        throw DataError(line_tag(*feature_path, lineno) + ": inconsistent feature width");
      rows.push_back(std::move(row));
    }
    if (rows.size() != static_cast<std::size_t>(g.num_nodes))
      throw DataError("feature file has " + std::to_string(rows.size()) + " rows, graph has " +
                      std::to_string(g.num_nodes) + " nodes");
    Eigen::MatrixXd x(g.num_nodes, static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < g.num_nodes; ++i)
      for (Index j = 0; j < x.cols(); ++j)
        x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    g.features = std::move(x);
  }

  if (label_path) {
    std::ifstream lin(*label_path);
    if (!lin) throw DataError("cannot open label file: " + label_path->string());
    std::vector<int> labels(static_cast<std::size_t>(g.num_nodes), -1);
    lineno = 0;
    while (std::getline(lin, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto toks = tokenize(line);
      if (toks.empty() || toks[0][0] == '#') continue;
      if (toks.size() != 2)
        throw DataError(line_tag(*label_path, lineno) + ": expected 'node label'");
      auto it = ids.find(toks[0]);
      if (it == ids.end())
        throw DataError(line_tag(*label_path, lineno) + ": unknown node '" + toks[0] + "'");
      double v = parse_double(toks[1], line_tag(*label_path, lineno));
      if (v != std::floor(v) || v < 0)
        throw DataError(line_tag(*label_path, lineno) + ": label must be a non-negative integer");
      labels[static_cast<std::size_t>(it->second)] = static_cast<int>(v);
    }
    g.labels = std::move(labels);
  }

  g.validate();
  return g;
}

Eigen::MatrixXd default_features(const TemporalGraph& g, Index dim) {
  if (dim < 1) throw UsageError("default_features: dim must be >= 1");
  auto deg = g.degrees();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(g.num_nodes, dim);
  for (Index i = 0; i < g.num_nodes; ++i) {
    auto d = static_cast<std::uint64_t>(deg[static_cast<std::size_t>(i)]);
    auto bucket = static_cast<Index>(std::bit_width(d + 1) - 1);  // floor(log2(1+deg))
    x(i, std::min(bucket, dim - 1)) = 1.0;
  }
  return x;
}

GraphView induce_view(const TemporalGraph& g, double center, Index s, WindowBounds bounds) {
  if (s < 1) throw UsageError("induce_view: s must be >= 1");
  g.validate();
  const double lo_ts = g.min_ts();
  const double hi_ts = g.max_ts();
  const double half = g.timespan() / (2.0 * static_cast<double>(s));
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * g.timespan();
  if (center < lo_ts + half - slack || center > hi_ts - half + slack) {
    std::ostringstream oss;
    oss << "window center " << center << " outside feasible interval [" << (lo_ts + half)
        << ", " << (hi_ts - half) << "] for s=" << s;
    throw UsageError(oss.str());
  }

  GraphView v;
  v.center = center;
  v.lo = std::max(center - half, lo_ts);
  v.hi = std::min(center + half, hi_ts);
  v.hi_inclusive = (bounds == WindowBounds::Closed);

  std::vector<Index> nodes;
  std::vector<std::pair<Index, Index>> pairs;  // normalized undirected pairs
  for (const auto& e : g.edges) {
    if (e.ts < v.lo) continue;
    if (v.hi_inclusive ? (e.ts > v.hi) : (e.ts >= v.hi)) continue;
    ++v.num_edges;
    nodes.push_back(e.src);
    nodes.push_back(e.dst);
    pairs.emplace_back(std::min(e.src, e.dst), std::max(e.src, e.dst));
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  v.active_nodes = std::move(nodes);

  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  const auto m = static_cast<Index>(v.active_nodes.size());
  std::vector<Triplet> trip;
  trip.reserve(pairs.size() * 2);
  for (const auto& [a, b] : pairs) {
    Index la = v.local_index(a);
    Index lb = v.local_index(b);
    trip.push_back({la, lb, 1.0});
    if (la != lb) trip.push_back({lb, la, 1.0});
  }
  v.local_adj = SparseMatrix::from_triplets(m, m, std::move(trip));
  return v;
}

Index GraphView::local_index(Index global_node) const {
  auto it = std::lower_bound(active_nodes.begin(), active_nodes.end(), global_node);
  if (it == active_nodes.end() || *it != global_node) return -1;
  return static_cast<Index>(it - active_nodes.begin());
}

int span_of(const TemporalGraph& g, double center, int num_spans) {
  const double width = g.timespan() / num_spans;
  auto idx = static_cast<int>(std::floor((center - g.min_ts()) / width));
  return std::clamp(idx, 0, num_spans - 1);
}

Eigen::MatrixXd view_feature_rows(const TemporalGraph& g, const Eigen::MatrixXd& base,
                                  const std::vector<Index>& nodes, double center) {
  Eigen::MatrixXd x(static_cast<Index>(nodes.size()), base.cols());
  const int span = g.span_features ? span_of(g, center, g.span_features->num_spans()) : 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Eigen::VectorXd* ov =
        g.span_features ? g.span_features->find(span, nodes[i]) : nullptr;
    if (ov)
      x.row(static_cast<Index>(i)) = ov->transpose();
    else
      x.row(static_cast<Index>(i)) = base.row(nodes[i]);
  }
  return x;
}

namespace {

constexpr char kMagic[4] = {'T', 'G', 'V', '1'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kHasFeatures = 1u << 0;
constexpr std::uint32_t kHasLabels = 1u << 1;
constexpr std::uint32_t kHasNames = 1u << 2;
constexpr std::uint32_t kHasSpanFeatures = 1u << 3;

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("truncated graph container");
  return v;
}

}  // namespace

void save_graph(const TemporalGraph& g, const std::filesystem::path& path) {
  g.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(g.num_nodes));
  put<std::uint64_t>(out, g.edges.size());
  for (const auto& e : g.edges) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(e.src));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(e.dst));
    put<double>(out, e.ts);
  }
  std::uint32_t flags = 0;
  if (g.features) flags |= kHasFeatures;
  if (g.labels) flags |= kHasLabels;
  if (!g.node_names.empty()) flags |= kHasNames;
  if (g.span_features) flags |= kHasSpanFeatures;
  put<std::uint32_t>(out, flags);
  if (g.features) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(g.features->rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(g.features->cols()));
    for (Index i = 0; i < g.features->rows(); ++i)
      for (Index j = 0; j < g.features->cols(); ++j) put<double>(out, (*g.features)(i, j));
  }
  if (g.labels)
    for (int l : *g.labels) put<std::int32_t>(out, l);
  if (!g.node_names.empty()) {
    for (const auto& name : g.node_names) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
  }
  if (g.span_features) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.span_features->num_spans()));
    put<std::uint64_t>(out, g.span_features->overrides().size());
    for (const auto& [key, row] : g.span_features->overrides()) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(key.first));
      put<std::uint64_t>(out, static_cast<std::uint64_t>(key.second));
      for (Index j = 0; j < row.size(); ++j) put<double>(out, row[j]);
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

TemporalGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open graph container: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a graph container (bad magic): " + path.string());
  auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion)
    throw DataError("unsupported graph container version " + std::to_string(version));

  TemporalGraph g;
  g.num_nodes = static_cast<Index>(get<std::uint64_t>(in));
  auto num_edges = get<std::uint64_t>(in);
  g.edges.reserve(num_edges);
  for (std::uint64_t i = 0; i < num_edges; ++i) {
    TemporalEdge e;
    e.src = static_cast<Index>(get<std::uint64_t>(in));
    e.dst = static_cast<Index>(get<std::uint64_t>(in));
    e.ts = get<double>(in);
    g.edges.push_back(e);
  }
  auto flags = get<std::uint32_t>(in);
  if (flags & kHasFeatures) {
    auto rows = static_cast<Index>(get<std::uint64_t>(in));
    auto cols = static_cast<Index>(get<std::uint64_t>(in));
    Eigen::MatrixXd x(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) x(i, j) = get<double>(in);
    g.features = std::move(x);
  }
  if (flags & kHasLabels) {
    std::vector<int> labels(static_cast<std::size_t>(g.num_nodes));
    for (auto& l : labels) l = get<std::int32_t>(in);
    g.labels = std::move(labels);
  }
  if (flags & kHasNames) {
    g.node_names.resize(static_cast<std::size_t>(g.num_nodes));
    for (auto& name : g.node_names) {
      auto len = get<std::uint32_t>(in);
      name.resize(len);
      in.read(name.data(), len);
      if (!in) throw DataError("truncated graph container");
    }
  }
  if (flags & kHasSpanFeatures) {
    auto spans = static_cast<int>(get<std::uint32_t>(in));
    if (spans < 1) throw DataError("graph container: invalid span count");
    TimespanFeatures sf(spans);
    auto count = get<std::uint64_t>(in);
    if (!g.features) throw DataError("graph container: span overrides without features");
    for (std::uint64_t i = 0; i < count; ++i) {
      auto span = static_cast<int>(get<std::uint32_t>(in));
      auto node = static_cast<Index>(get<std::uint64_t>(in));
      Eigen::VectorXd row(g.features->cols());
      for (Index j = 0; j < row.size(); ++j) row[j] = get<double>(in);
      if (span < 0 || span >= spans) throw DataError("graph container: span index out of range");
      sf.set_override(span, node, std::move(row));
    }
    g.span_features = std::move(sf);
  }
  g.validate();
  return g;
}

}  // namespace cldg
