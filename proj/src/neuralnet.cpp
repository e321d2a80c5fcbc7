#include "fjsec/neuralnet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace fjsec {

namespace {
constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.99;
constexpr double kCeClamp = 1e-12;

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "dense";
    case LayerKind::ReLU: return "relu";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Softmax: return "softmax";
    case LayerKind::PowerNorm: return "powernorm";
  }
  return "?";
}
}  // namespace

LayerSpec LayerSpec::dense(int in, int out) {
  return {LayerKind::Dense, in, out, 0, 0.0};
}
LayerSpec LayerSpec::relu() { return {LayerKind::ReLU, 0, 0, 0, 0.0}; }
LayerSpec LayerSpec::batchnorm(int dim) {
  return {LayerKind::BatchNorm, 0, 0, dim, 0.0};
}
LayerSpec LayerSpec::softmax() { return {LayerKind::Softmax, 0, 0, 0, 0.0}; }
LayerSpec LayerSpec::powernorm(double target_power) {
  return {LayerKind::PowerNorm, 0, 0, 0, target_power};
}

Network::Network(std::vector<LayerSpec> specs, Rng& init_rng)
    : specs_(std::move(specs)) {
  if (specs_.empty()) throw std::invalid_argument("network: no layers");
  if (specs_.front().kind != LayerKind::Dense)
    throw std::invalid_argument("network: first layer must be dense");
  int cur = specs_.front().in;
  input_dim_ = cur;
  for (const LayerSpec& s : specs_) {
    Layer layer;
    layer.spec = s;
    switch (s.kind) {
      case LayerKind::Dense: {
        if (s.in != cur)
          throw std::invalid_argument("network: dense input dim mismatch");
        if (s.in <= 0 || s.out <= 0)
          throw std::invalid_argument("network: dense dims must be positive");
        Tensor w, b;
        const double bound = std::sqrt(6.0 / (s.in + s.out));
        w.w = RMat(s.in, s.out);
        for (int j = 0; j < s.out; ++j)
          for (int i = 0; i < s.in; ++i)
            w.w(i, j) = bound * (2.0 * init_rng.uniform() - 1.0);
        b.w = RMat::Zero(1, s.out);
        layer.params = {std::move(w), std::move(b)};
        cur = s.out;
        break;
      }
      case LayerKind::BatchNorm: {
        if (s.dim != cur)
          throw std::invalid_argument("network: batchnorm dim mismatch");
        Tensor gamma, beta;
        gamma.w = RMat::Ones(1, s.dim);
        beta.w = RMat::Zero(1, s.dim);
        layer.params = {std::move(gamma), std::move(beta)};
        layer.run_mean = RMat::Zero(1, s.dim);
        layer.run_var = RMat::Ones(1, s.dim);
        break;
      }
      case LayerKind::PowerNorm:
        if (!(s.target_power > 0.0))
          throw std::invalid_argument("network: powernorm target must be > 0");
        break;
      case LayerKind::ReLU:
      case LayerKind::Softmax:
        break;
    }
    for (Tensor& t : layer.params) {
      t.g = RMat::Zero(t.w.rows(), t.w.cols());
      t.m = RMat::Zero(t.w.rows(), t.w.cols());
      t.v = RMat::Zero(t.w.rows(), t.w.cols());
    }
    layers_.push_back(std::move(layer));
  }
  output_dim_ = cur;
}

RMat Network::forward(const RMat& x, Tape* tape, bool training) {
  if (x.cols() != input_dim_)
    throw std::invalid_argument("forward: input width mismatch");
  if (x.rows() == 0) throw std::invalid_argument("forward: empty batch");
  require_finite(x, "forward input");
  const size_t nl = layers_.size();
  if (tape) {
    tape->acts.assign(nl + 1, RMat());
    tape->aux.assign(nl, RMat());
    tape->mean.assign(nl, RVec());
    tape->invstd.assign(nl, RVec());
    tape->scale.assign(nl, 0.0);
    tape->acts[0] = x;
  }
  RMat cur = x;
  const double batch = static_cast<double>(x.rows());
  for (size_t li = 0; li < nl; ++li) {
    Layer& layer = layers_[li];
    switch (layer.spec.kind) {
      case LayerKind::Dense: {
        cur = (cur * layer.params[0].w).rowwise() +
              layer.params[1].w.row(0);
        break;
      }
      case LayerKind::ReLU:
        cur = cur.cwiseMax(0.0);
        break;
      case LayerKind::BatchNorm: {
        const Eigen::Index d = cur.cols();
        RMat xhat(cur.rows(), d);
        RVec mu(d), invstd(d);
        if (training) {
          if (cur.rows() < 2)
            throw std::invalid_argument(
                "batchnorm: training batch must have >= 2 samples");
          for (Eigen::Index j = 0; j < d; ++j) {
            mu(j) = cur.col(j).mean();
            const double var = (cur.col(j).array() - mu(j)).square().mean();
            invstd(j) = 1.0 / std::sqrt(var + kBnEps);
            xhat.col(j) = (cur.col(j).array() - mu(j)) * invstd(j);
            layer.run_mean(0, j) =
                kBnMomentum * layer.run_mean(0, j) + (1.0 - kBnMomentum) * mu(j);
            layer.run_var(0, j) =
                kBnMomentum * layer.run_var(0, j) + (1.0 - kBnMomentum) * var;
          }
          if (tape) {
            tape->mean[li] = mu;
            tape->invstd[li] = invstd;
            tape->aux[li] = xhat;
          }
        } else {
          for (Eigen::Index j = 0; j < d; ++j) {
            const double is = 1.0 / std::sqrt(layer.run_var(0, j) + kBnEps);
            xhat.col(j) = (cur.col(j).array() - layer.run_mean(0, j)) * is;
          }
        }
        for (Eigen::Index j = 0; j < d; ++j)
          xhat.col(j) = xhat.col(j).array() * layer.params[0].w(0, j) +
                        layer.params[1].w(0, j);
        cur = std::move(xhat);
        break;
      }
      case LayerKind::Softmax: {
        RMat out(cur.rows(), cur.cols());
        for (Eigen::Index r = 0; r < cur.rows(); ++r) {
          const double mx = cur.row(r).maxCoeff();
          RVec e = (cur.row(r).array() - mx).exp();
          out.row(r) = e.transpose() / e.sum();
        }
        cur = out;
        break;
      }
      case LayerKind::PowerNorm: {
        const double mean_power =
            std::max(cur.squaredNorm() / batch, 1e-300);
        const double scale = std::sqrt(layer.spec.target_power / mean_power);
        if (tape) tape->scale[li] = scale;
        if (tape) tape->aux[li] = cur;  // pre-scale input
        cur *= scale;
        break;
      }
    }
    if (tape) tape->acts[li + 1] = cur;
  }
  return cur;
}

RMat Network::infer(const RMat& x) { return forward(x, nullptr, false); }

RMat Network::backward(const Tape& tape, const RMat& dout) {
  if (tape.acts.size() != layers_.size() + 1)
    throw std::invalid_argument("backward: tape does not match network");
  RMat grad = dout;
  const double batch = static_cast<double>(tape.acts[0].rows());
  for (size_t ii = layers_.size(); ii-- > 0;) {
    Layer& layer = layers_[ii];
    const RMat& x_in = tape.acts[ii];
    switch (layer.spec.kind) {
      case LayerKind::Dense: {
        layer.params[0].g.noalias() += x_in.transpose() * grad;
        layer.params[1].g.row(0) += grad.colwise().sum();
        grad = grad * layer.params[0].w.transpose();
        break;
      }
      case LayerKind::ReLU:
        grad = ((x_in.array() > 0.0).cast<double>() * grad.array()).matrix();
        break;
      case LayerKind::BatchNorm: {
        const RMat& xhat = tape.aux[ii];
        const RVec& invstd = tape.invstd[ii];
        if (xhat.size() == 0)
          throw std::invalid_argument("backward: batchnorm tape missing");
        const double b = static_cast<double>(xhat.rows());
        RMat dx(xhat.rows(), xhat.cols());
        for (Eigen::Index j = 0; j < xhat.cols(); ++j) {
          const double gamma = layer.params[0].w(0, j);
          layer.params[0].g(0, j) += grad.col(j).dot(xhat.col(j));
          layer.params[1].g(0, j) += grad.col(j).sum();
          const RVec dxhat = gamma * grad.col(j);
          const double s1 = dxhat.sum();
          const double s2 = dxhat.dot(xhat.col(j));
          dx.col(j) = (invstd(j) / b) *
                      (b * dxhat.array() - s1 - xhat.col(j).array() * s2);
        }
        grad = std::move(dx);
        break;
      }
      case LayerKind::Softmax: {
        const RMat& p = tape.acts[ii + 1];
        RMat out(p.rows(), p.cols());
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
          const double dot = grad.row(r).dot(p.row(r));
          out.row(r) = p.row(r).array() * (grad.row(r).array() - dot);
        }
        grad = out;
        break;
      }
      case LayerKind::PowerNorm: {
        const double scale = tape.scale[ii];
        const RMat& xpre = tape.aux[ii];
        const double mean_power =
            std::max(xpre.squaredNorm() / batch, 1e-300);
        const double s = (grad.array() * xpre.array()).sum();
        grad = scale * grad - (scale * s / (mean_power * batch)) * xpre;
        break;
      }
    }
  }
  return grad;
}

void Network::zero_grads() {
  for (Layer& layer : layers_)
    for (Tensor& t : layer.params) t.g.setZero();
}

void Network::adam_step(const AdamConfig& cfg) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (size_t li = 0; li < layers_.size(); ++li) {
    for (Tensor& p : layers_[li].params) {
      if (!p.g.allFinite())
        throw NumericalError("adam_step: non-finite gradient in layer " +
                             layer_label(li));
      p.m = cfg.beta1 * p.m + (1.0 - cfg.beta1) * p.g;
      p.v = cfg.beta2 * p.v + (1.0 - cfg.beta2) * p.g.array().square().matrix();
      p.w.array() -= cfg.lr * (p.m.array() / c1) /
                     ((p.v.array() / c2).sqrt() + cfg.eps);
      if (!p.w.allFinite())
        throw NumericalError("adam_step: non-finite parameter in layer " +
                             layer_label(li));
      p.g.setZero();
    }
  }
}

std::vector<RMat*> Network::param_views() {
  std::vector<RMat*> out;
  for (Layer& layer : layers_)
    for (Tensor& t : layer.params) out.push_back(&t.w);
  return out;
}

std::vector<RMat*> Network::grad_views() {
  std::vector<RMat*> out;
  for (Layer& layer : layers_)
    for (Tensor& t : layer.params) out.push_back(&t.g);
  return out;
}

std::string Network::layer_label(size_t layer) const {
  return std::to_string(layer) + " (" + kind_name(specs_[layer].kind) + ")";
}

std::vector<int> sample_labels(size_t n, int classes, Rng& rng) {
  if (classes < 1) throw std::invalid_argument("sample_labels: classes < 1");
  std::vector<int> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = static_cast<int>(rng.integer(static_cast<uint64_t>(classes)));
  return out;
}

RMat one_hot(const std::vector<int>& labels, int classes) {
  if (labels.empty()) throw std::invalid_argument("one_hot: empty batch");
  RMat out = RMat::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw std::invalid_argument("one_hot: label out of range");
    out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return out;
}

double cross_entropy(const RMat& probs, const std::vector<int>& labels,
                     size_t* clamp_count) {
  if (static_cast<size_t>(probs.rows()) != labels.size())
    throw std::invalid_argument("cross_entropy: batch size mismatch");
  if (labels.empty()) throw std::invalid_argument("cross_entropy: empty batch");
  size_t clamped = 0;
  double acc = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l >= probs.cols())
      throw std::invalid_argument("cross_entropy: label out of range");
    double p = probs(static_cast<Eigen::Index>(i), l);
    if (p < kCeClamp) {
      p = kCeClamp;
      ++clamped;
    }
    acc -= std::log(p);
  }
  if (clamp_count) *clamp_count = clamped;
  return acc / static_cast<double>(labels.size());
}

RMat cross_entropy_grad(const RMat& probs, const std::vector<int>& labels) {
  RMat g = RMat::Zero(probs.rows(), probs.cols());
  const double b = static_cast<double>(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i);
    const double p = std::max(probs(r, labels[i]), kCeClamp);
    g(r, labels[i]) = -1.0 / (p * b);
  }
  return g;
}

RMat softmax_ce_grad(const RMat& probs, const std::vector<int>& labels) {
  RMat g = probs / static_cast<double>(labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    g(static_cast<Eigen::Index>(i), labels[i]) -=
        1.0 / static_cast<double>(labels.size());
  return g;
}

FlopsReport flops(const std::vector<LayerSpec>& specs) {
  FlopsReport rep;
  for (const LayerSpec& s : specs) {
    if (s.kind != LayerKind::Dense) continue;
    FlopsReport::Row row;
    row.in = s.in;
    row.out = s.out;
    row.text = static_cast<long long>(2 * s.in - 1) * s.out;
    row.table = 2LL * s.in * s.out;
    rep.total_text += row.text;
    rep.total_table += row.table;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- checkpoint io ----------------------------------------------------

namespace {
constexpr char kMagic[4] = {'F', 'J', 'N', 'N'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}
void put_mat(std::ofstream& os, const RMat& m) {
  put<uint64_t>(os, m.rows());
  put<uint64_t>(os, m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(os, m(r, c));
}
RMat get_mat(std::ifstream& is) {
  const uint64_t rows = get<uint64_t>(is);
  const uint64_t cols = get<uint64_t>(is);
  if (rows > 1u << 24 || cols > 1u << 24)
    throw std::runtime_error("checkpoint: implausible tensor shape");
  RMat m(rows, cols);
  for (uint64_t r = 0; r < rows; ++r)
    for (uint64_t c = 0; c < cols; ++c) m(r, c) = get<double>(is);
  return m;
}
}  // namespace

struct NetworkIo {
  static void save(const Network& net, const std::string& path,
                   const std::string& extra_json) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint format is little-endian");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
    os.write(kMagic, 4);
    put<uint32_t>(os, kVersion);
    put<uint32_t>(os, static_cast<uint32_t>(net.layers_.size()));
    put<uint64_t>(os, net.step_);
    for (const Network::Layer& layer : net.layers_) {
      put<uint32_t>(os, static_cast<uint32_t>(layer.spec.kind));
      put<int32_t>(os, layer.spec.in);
      put<int32_t>(os, layer.spec.out);
      put<int32_t>(os, layer.spec.dim);
      put<double>(os, layer.spec.target_power);
      const uint32_t extra = layer.spec.kind == LayerKind::BatchNorm ? 2 : 0;
      put<uint32_t>(os, static_cast<uint32_t>(layer.params.size()) + extra);
      for (const Network::Tensor& t : layer.params) put_mat(os, t.w);
      if (extra) {
        put_mat(os, layer.run_mean);
        put_mat(os, layer.run_var);
      }
    }
    if (!os) throw std::runtime_error("checkpoint: write failed " + path);
    os.close();

    nlohmann::json meta;
    meta["format"] = "fjnn-v1";
    meta["step"] = net.step_;
    meta["layers"] = nlohmann::json::array();
    for (const LayerSpec& s : net.specs_) {
      meta["layers"].push_back({{"kind", kind_name(s.kind)},
                                {"in", s.in},
                                {"out", s.out},
                                {"dim", s.dim},
                                {"target_power", s.target_power}});
    }
    if (!extra_json.empty()) meta["extra"] = nlohmann::json::parse(extra_json);
    std::ofstream js(path + ".json", std::ios::trunc);
    js << meta.dump(2) << "\n";
  }

  static Network load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
      throw std::runtime_error("checkpoint: bad magic");
    if (get<uint32_t>(is) != kVersion)
      throw std::runtime_error("checkpoint: unsupported version");
    const uint32_t n_layers = get<uint32_t>(is);
    const uint64_t step = get<uint64_t>(is);
    std::vector<LayerSpec> specs;
    struct Loaded {
      std::vector<RMat> tensors;
    };
    std::vector<Loaded> loaded;
    for (uint32_t i = 0; i < n_layers; ++i) {
      LayerSpec s;
      s.kind = static_cast<LayerKind>(get<uint32_t>(is));
      s.in = get<int32_t>(is);
      s.out = get<int32_t>(is);
      s.dim = get<int32_t>(is);
      s.target_power = get<double>(is);
      const uint32_t nt = get<uint32_t>(is);
      Loaded l;
      for (uint32_t t = 0; t < nt; ++t) l.tensors.push_back(get_mat(is));
      specs.push_back(s);
      loaded.push_back(std::move(l));
    }
    Rng dummy(0);
    Network net(specs, dummy);
    net.step_ = step;
    for (uint32_t i = 0; i < n_layers; ++i) {
      Network::Layer& layer = net.layers_[i];
      const auto& tensors = loaded[i].tensors;
      const size_t base = layer.params.size();
      if (tensors.size() < base)
        throw std::runtime_error("checkpoint: tensor count mismatch");
      for (size_t t = 0; t < base; ++t) {
        if (tensors[t].rows() != layer.params[t].w.rows() ||
            tensors[t].cols() != layer.params[t].w.cols())
          throw std::runtime_error("checkpoint: tensor shape mismatch");
        layer.params[t].w = tensors[t];
      }
      if (layer.spec.kind == LayerKind::BatchNorm) {
        if (tensors.size() != base + 2)
          throw std::runtime_error("checkpoint: batchnorm stats missing");
        layer.run_mean = tensors[base];
        layer.run_var = tensors[base + 1];
      }
    }
    return net;
  }
};

void Network::save(const std::string& path, const std::string& extra_json) const {
  NetworkIo::save(*this, path, extra_json);
}

Network Network::load(const std::string& path) { return NetworkIo::load(path); }

}  // namespace fjsec
