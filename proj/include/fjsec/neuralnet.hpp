#pragma once

#include <string>
#include <vector>

#include "fjsec/complexlinalg.hpp"
#include "fjsec/rng.hpp"

namespace fjsec {

// Minimal dense-network engine: enough for the autoencoder transceivers and
// the MI estimators, nothing more. Data is batch-major (rows = samples).

enum class LayerKind { Dense, ReLU, BatchNorm, Softmax, PowerNorm };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int in = 0;
  int out = 0;
  int dim = 0;
  double target_power = 0.0;

  static LayerSpec dense(int in, int out);
  static LayerSpec relu();
  static LayerSpec batchnorm(int dim);
  static LayerSpec softmax();
  static LayerSpec powernorm(double target_power);
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct Batch {
  RMat inputs;
  std::vector<int> labels;
};

class Network {
 public:
  // Glorot-uniform dense weights (bound sqrt(6 / (in + out))), zero biases;
  // batchnorm starts as identity with running stats (0, 1).
  Network(std::vector<LayerSpec> specs, Rng& init_rng);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  uint64_t step() const { return step_; }

  // Per-pass activation cache; lets several forward passes share one set of
  // parameters before their backward passes run.
  struct Tape {
    std::vector<RMat> acts;  // acts[0] = input, acts[i+1] = layer i output
    std::vector<RMat> aux;   // layer-specific cache
    std::vector<RVec> mean, invstd;  // batchnorm caches
    std::vector<double> scale;       // powernorm caches
  };

  // training=true uses batch statistics and updates batchnorm running stats.
  RMat forward(const RMat& x, Tape* tape, bool training);
  RMat infer(const RMat& x);  // inference mode, no tape

  // Accumulates parameter gradients and returns dLoss/dinput.
  RMat backward(const Tape& tape, const RMat& dout);

  void zero_grads();
  void adam_step(const AdamConfig& cfg);

  // Parameter/gradient views in a fixed order (for checkpoints and tests).
  std::vector<RMat*> param_views();
  std::vector<RMat*> grad_views();
  std::string layer_label(size_t layer) const;

  void save(const std::string& path, const std::string& extra_json = "") const;
  static Network load(const std::string& path);

 private:
  struct Tensor {
    RMat w, g, m, v;
  };
  struct Layer {
    LayerSpec spec;
    std::vector<Tensor> params;  // Dense: W, b; BatchNorm: gamma, beta
    RMat run_mean, run_var;      // BatchNorm only
  };

  std::vector<LayerSpec> specs_;
  std::vector<Layer> layers_;
  int input_dim_ = 0;
  int output_dim_ = 0;
  uint64_t step_ = 0;

  friend struct NetworkIo;
};

std::vector<int> sample_labels(size_t n, int classes, Rng& rng);
RMat one_hot(const std::vector<int>& labels, int classes);

// Mean negative log-likelihood in nats; probabilities are clamped below at
// 1e-12 before the log, clamp_count (optional) reports how often that fired.
double cross_entropy(const RMat& probs, const std::vector<int>& labels,
                     size_t* clamp_count = nullptr);

// dLoss/dprobs of cross_entropy (for the composed softmax->CE path).
RMat cross_entropy_grad(const RMat& probs, const std::vector<int>& labels);

// Analytic gradient of CE(softmax(z), labels) w.r.t. the logits z,
// expressed at the softmax output: (p - onehot) / batch.
RMat softmax_ce_grad(const RMat& probs, const std::vector<int>& labels);

struct FlopsReport {
  struct Row {
    int in = 0;
    int out = 0;
    long long text = 0;   // (2 in - 1) out: multiplies plus adds, exact
    long long table = 0;  // 2 in out: the common rounded-up convention
  };
  std::vector<Row> rows;
  long long total_text = 0;
  long long total_table = 0;
};

FlopsReport flops(const std::vector<LayerSpec>& specs);

}  // namespace fjsec
