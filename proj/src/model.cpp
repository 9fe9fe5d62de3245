#include "cldg/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace cldg {

std::array<Eigen::MatrixXd*, ModelTensors::kCount> ModelTensors::tensors() {
  return {&local_w1, &local_w2, &global_w1, &global_w2,
          &proj_local_w, &proj_global_w, &proj_local_b, &proj_global_b};
}

std::array<const Eigen::MatrixXd*, ModelTensors::kCount> ModelTensors::tensors() const {
  return {&local_w1, &local_w2, &global_w1, &global_w2,
          &proj_local_w, &proj_global_w, &proj_local_b, &proj_global_b};
}

std::array<const char*, ModelTensors::kCount> ModelTensors::names() {
  return {"local_w1", "local_w2", "global_w1", "global_w2",
          "proj_local_w", "proj_global_w", "proj_local_b", "proj_global_b"};
}

namespace {

Eigen::MatrixXd glorot(Index rows, Index cols, Rng rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-a, a);
  return m;
}

void shape_tensors(ModelTensors& t, const ModelConfig& cfg) {
  t.local_w1.resize(cfg.d_in, cfg.d_hidden);
  t.local_w2.resize(cfg.d_hidden, cfg.d_hidden);
  t.global_w1.resize(cfg.d_in, cfg.d_hidden);
  t.global_w2.resize(cfg.d_hidden, cfg.d_hidden);
  t.proj_local_w.resize(cfg.d_hidden, cfg.d_out);
  t.proj_global_w.resize(cfg.d_hidden, cfg.d_out);
  t.proj_local_b.resize(1, cfg.d_out);
  t.proj_global_b.resize(1, cfg.d_out);
}

inline double leaky(double v, double slope) { return v >= 0.0 ? v : slope * v; }
inline double leaky_grad(double v, double slope) { return v >= 0.0 ? 1.0 : slope; }

Eigen::MatrixXd leaky_mat(const Eigen::MatrixXd& m, double slope) {
  return m.unaryExpr([slope](double v) { return leaky(v, slope); });
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.d_in < 1 || cfg.d_hidden < 1 || cfg.d_out < 1)
    throw UsageError("model: dimensions must be positive");
  ModelParams p;
  p.config = cfg;
  shape_tensors(p, cfg);
  auto ts = p.tensors();
  for (int i = 0; i < kCount; ++i) {
    if (ts[i]->rows() == 1) {
      ts[i]->setZero();  // projection biases
    } else {
      *ts[i] = glorot(ts[i]->rows(), ts[i]->cols(),
                      Rng::derive(seed, {0x6d6f64656cull, static_cast<std::uint64_t>(i)}));
    }
  }
  return p;
}

Index ModelParams::param_count() const {
  Index n = 0;
  for (const auto* t : tensors()) n += t->size();
  return n;
}

ParamGrads zero_grads(const ModelConfig& cfg) {
  ParamGrads g;
  shape_tensors(g, cfg);
  for (auto* t : g.tensors()) t->setZero();
  return g;
}

Eigen::MatrixXd forward(const ModelParams& p, const SparseMatrix& prop,
                        const Eigen::MatrixXd& x, Scope scope, EncodeCache* cache) {
  if (prop.rows() != prop.cols() || prop.rows() != x.rows())
    throw DataError("forward: propagation operator and features disagree on node count");
  if (x.cols() != p.config.d_in)
    throw DataError("forward: feature width " + std::to_string(x.cols()) +
                    " does not match model d_in " + std::to_string(p.config.d_in));
  const double slope = p.config.leaky_slope;
  const auto& w1 = scope == Scope::Local ? p.local_w1 : p.global_w1;
  const auto& w2 = scope == Scope::Local ? p.local_w2 : p.global_w2;
  Eigen::MatrixXd px = prop.multiply(x);
  Eigen::MatrixXd pre1 = px * w1;
  Eigen::MatrixXd act1 = leaky_mat(pre1, slope);
  Eigen::MatrixXd pact1 = prop.multiply(act1);
  Eigen::MatrixXd pre2 = pact1 * w2;
  Eigen::MatrixXd h = leaky_mat(pre2, slope);
  if (cache) {
    cache->scope = scope;
    cache->prop = &prop;
    cache->px = std::move(px);
    cache->pre1 = std::move(pre1);
    cache->act1 = std::move(act1);
    cache->pact1 = std::move(pact1);
    cache->pre2 = std::move(pre2);
    cache->h = h;
  }
  return h;
}

Eigen::MatrixXd project(const ModelParams& p, const Eigen::MatrixXd& h, Scope scope,
                        EncodeCache* cache) {
  const double slope = p.config.leaky_slope;
  const auto& w = scope == Scope::Local ? p.proj_local_w : p.proj_global_w;
  const auto& b = scope == Scope::Local ? p.proj_local_b : p.proj_global_b;
  Eigen::MatrixXd pre = (h * w).rowwise() + b.row(0);
  Eigen::MatrixXd act = leaky_mat(pre, slope);
  Eigen::VectorXd norms = act.rowwise().norm();
  Eigen::MatrixXd z = act;
  for (Index i = 0; i < z.rows(); ++i) {
    if (norms[i] > 0.0) z.row(i) /= norms[i];  // zero rows stay zero
  }
  if (cache) {
    cache->proj_pre = std::move(pre);
    cache->proj_act = std::move(act);
    cache->norms = std::move(norms);
    cache->z = z;
  }
  return z;
}

EncodeCache encode(const ModelParams& p, const SparseMatrix& prop, const Eigen::MatrixXd& x,
                   Scope scope) {
  EncodeCache cache;
  Eigen::MatrixXd h = forward(p, prop, x, scope, &cache);
  project(p, h, scope, &cache);
  return cache;
}

void backward(const ModelParams& p, const EncodeCache& cache, const Eigen::MatrixXd& dz,
              ParamGrads& grads) {
  const double slope = p.config.leaky_slope;
  const bool local = cache.scope == Scope::Local;
  const auto& w2 = local ? p.local_w2 : p.global_w2;
  const auto& wp = local ? p.proj_local_w : p.proj_global_w;
  auto& g_w1 = local ? grads.local_w1 : grads.global_w1;
  auto& g_w2 = local ? grads.local_w2 : grads.global_w2;
  auto& g_wp = local ? grads.proj_local_w : grads.proj_global_w;
  auto& g_bp = local ? grads.proj_local_b : grads.proj_global_b;

  // Row normalization: d/dY [Y/|Y|] pulls back dz to (dz - z (z.dz)) / |Y|.
  Eigen::MatrixXd d_act(dz.rows(), dz.cols());
  for (Index i = 0; i < dz.rows(); ++i) {
    const double n = cache.norms[i];
    if (n > 0.0)
      d_act.row(i) = (dz.row(i) - cache.z.row(i) * cache.z.row(i).dot(dz.row(i))) / n;
    else
      d_act.row(i).setZero();
  }
  Eigen::MatrixXd d_pre = d_act.cwiseProduct(cache.proj_pre.unaryExpr(
      [slope](double v) { return leaky_grad(v, slope); }));
  g_wp += cache.h.transpose() * d_pre;
  g_bp += d_pre.colwise().sum();
  Eigen::MatrixXd dh = d_pre * wp.transpose();

  Eigen::MatrixXd d_pre2 = dh.cwiseProduct(cache.pre2.unaryExpr(
      [slope](double v) { return leaky_grad(v, slope); }));
  g_w2 += cache.pact1.transpose() * d_pre2;
  Eigen::MatrixXd d_pact1 = d_pre2 * w2.transpose();
  Eigen::MatrixXd d_act1 = cache.prop->transpose_multiply(d_pact1);

  Eigen::MatrixXd d_pre1 = d_act1.cwiseProduct(cache.pre1.unaryExpr(
      [slope](double v) { return leaky_grad(v, slope); }));
  g_w1 += cache.px.transpose() * d_pre1;
}

namespace {

constexpr char kCkptMagic[4] = {'C', 'L', 'D', '1'};
constexpr std::uint32_t kCkptVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& p, const std::string& config_text,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.write(kCkptMagic, 4);
  put<std::uint32_t>(out, kCkptVersion);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p.config.d_in));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p.config.d_hidden));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p.config.d_out));
  put<double>(out, p.config.leaky_slope);
  for (const auto* t : p.tensors()) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t->rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t->cols()));
    for (Index i = 0; i < t->rows(); ++i)
      for (Index j = 0; j < t->cols(); ++j) put<double>(out, (*t)(i, j));
  }
  put<std::uint64_t>(out, config_text.size());
  out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::pair<ModelParams, std::string> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCkptMagic, 4) != 0)
    throw DataError("not a checkpoint (bad magic): " + path.string());
  auto version = get<std::uint32_t>(in);
  if (version != kCkptVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  ModelParams p;
  p.config.d_in = static_cast<Index>(get<std::uint64_t>(in));
  p.config.d_hidden = static_cast<Index>(get<std::uint64_t>(in));
  p.config.d_out = static_cast<Index>(get<std::uint64_t>(in));
  p.config.leaky_slope = get<double>(in);
  shape_tensors(p, p.config);
  for (auto* t : p.tensors()) {
    auto rows = static_cast<Index>(get<std::uint64_t>(in));
    auto cols = static_cast<Index>(get<std::uint64_t>(in));
    if (rows != t->rows() || cols != t->cols())
      throw DataError("checkpoint tensor shape does not match header dims");
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) (*t)(i, j) = get<double>(in);
  }
  auto len = get<std::uint64_t>(in);
  std::string config_text(len, '\0');
  in.read(config_text.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated checkpoint");
  return {std::move(p), std::move(config_text)};
}

}  // namespace cldg
