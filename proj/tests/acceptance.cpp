// Acceptance suite: thirteen release criteria, one PASS/FAIL line each,
// exit status 0 only when every criterion passes. Each check carries its
// own oracle (grid searches, analytic values, finite differences, paired
// reruns) and prints the measured quantity next to its tolerance so a red
// line is diagnosable from the log alone. Criterion numbers given on the
// command line restrict the run to that subset (a debugging aid); the
// default runs everything in order.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "fjsec/aefj.hpp"
#include "fjsec/channel.hpp"
#include "fjsec/conventional_fj.hpp"
#include "fjsec/harness.hpp"
#include "fjsec/mine.hpp"
#include "fjsec/neuralnet.hpp"

using namespace fjsec;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

int g_pass = 0;
int g_fail = 0;

double secs(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("C%02d %-26s %s  %s\n", id, name, ok ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  (ok ? g_pass : g_fail) += 1;
}

// ---------------------------------------------------------------------------
// 1. Nullspace exactness: classically designed jamming must vanish at the
//    legitimate receiver to numerical precision, and quickly.
void c01() {
  const auto t0 = clk::now();
  Rng ch = Rng::stream(101, StreamKind::Channel);
  Rng jam = Rng::stream(101, StreamKind::Jamming);
  double worst = 0.0;
  bool dims_ok = true;
  for (int i = 0; i < 1000; ++i) {
    const CMat h = sample_channel(4, 2, ch);
    const FjDesign d = design_fj(h, 1.0);
    dims_ok = dims_ok && d.n_fj == 2;
    const CVec w = sample_fj(d, jam);
    worst = std::max(worst, (h.adjoint() * w).norm() / w.norm());
  }
  const double el = secs(t0);
  report(1, "nullspace-fj-exactness",
         dims_ok && worst <= 1e-10 && el < 5.0,
         fmt("max |h^H w|/|w| %.2e (tol 1e-10), 1000 channels nt4 nr2, "
             "%.2f s (budget 5)",
             worst, el));
}

// ---------------------------------------------------------------------------
// 2. The two secrecy-rate evaluation paths (parallel-stream form vs the
//    general log-det form entered through the imperfect-CSI machinery with a
//    zero estimation error) must agree to near machine precision.
void c02() {
  Rng ch = Rng::stream(202, StreamKind::Channel);
  Rng ev = Rng::stream(202, StreamKind::Eavesdropper);
  Rng u = Rng::stream(202, StreamKind::Generic);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int nt = 2 + i % 5;  // 2..6
    const int nr = 1 + i % 2;
    const int ne = 1 + i % 3;
    const ChannelDraw d{sample_channel(nt, nr, ch), sample_channel(nt, ne, ev),
                        1.0, 1.0};
    const double p_total = 1.0 + 49.0 * u.uniform();
    const double phi = 0.05 + 0.9 * u.uniform();
    FjDesign des = design_fj(d.h, 1.0);
    const bool fj = des.n_fj > 0;
    des.sigma_v2 = fj ? (1.0 - phi) * p_total / des.n_fj : 0.0;
    const double p_info = fj ? phi * p_total : p_total;
    const RVec gains = svd(d.h.adjoint()).sigma.array().square();
    const PowerAllocation alloc = waterfill(gains, p_info);
    const CsiState csi{CsiMode::Statistical, 0.0, d.h};  // h_hat == h exactly
    const SecrecySample a = secrecy_rate_perfect(d, alloc, des);
    const SecrecySample b = secrecy_rate_imcsi(d, csi, alloc, des);
    worst = std::max({worst, std::abs(a.r_ab - b.r_ab),
                      std::abs(a.r_ae - b.r_ae), std::abs(a.r_s - b.r_s)});
  }
  report(2, "rate-path-equivalence", worst <= 1e-8,
         fmt("max |perfect - imcsi(h_hat=h)| %.2e nats (tol 1e-8), "
             "500 instances nt 2..6",
             worst));
}

// ---------------------------------------------------------------------------
// 3. Water-filling against a brute-force grid over the 3-stream power
//    simplex at 1e-3 of the budget per step.
void c03() {
  Rng u = Rng::stream(303, StreamKind::Generic);
  double worst_gap = -1e300;
  const auto objective = [](const RVec& g, double p1, double p2, double p3) {
    return std::log1p(g[0] * p1) + std::log1p(g[1] * p2) +
           std::log1p(g[2] * p3);
  };
  for (int k = 0; k < 100; ++k) {
    RVec gains(3);
    for (int i = 0; i < 3; ++i) gains[i] = 0.05 + 3.0 * u.uniform();
    std::sort(gains.data(), gains.data() + 3, std::greater<double>());
    const double p = 0.5 + 7.5 * u.uniform();
    const PowerAllocation a = waterfill(gains, p);
    const double wf =
        objective(gains, a.per_stream[0], a.per_stream[1], a.per_stream[2]);
    const int n = 1000;
    const double step = p / n;
    double best = -1e300;
    for (int i = 0; i <= n; ++i) {
      const double p1 = i * step;
      for (int j = 0; i + j <= n; ++j) {
        const double p2 = j * step;
        best = std::max(best, objective(gains, p1, p2, p - p1 - p2));
      }
    }
    worst_gap = std::max(worst_gap, best - wf);
  }
  report(3, "waterfill-vs-grid-oracle", worst_gap <= 2e-3,
         fmt("max (grid - waterfill) %.2e nats (tol 2e-3), 100 gain "
             "vectors, 1e-3-of-budget steps",
             worst_gap));
}

// ---------------------------------------------------------------------------
// 4. Gradient correctness of every layer kind by central finite differences
//    on every parameter entry, across 100 seeds.
struct CheckResult {
  double max_rel = 0.0;
};

template <typename LossFn, typename GradFn>
CheckResult grad_check(Network& net, const RMat& x, LossFn loss_of_out,
                       GradFn grad_of_out, double h = 1e-5) {
  Network::Tape tape;
  const RMat out = net.forward(x, &tape, true);
  net.zero_grads();
  net.backward(tape, grad_of_out(out));
  std::vector<RMat*> params = net.param_views();
  std::vector<RMat*> grads = net.grad_views();
  CheckResult res;
  for (size_t t = 0; t < params.size(); ++t) {
    RMat& w = *params[t];
    const RMat& g = *grads[t];
    RMat num(w.rows(), w.cols());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const double keep = w(r, c);
        w(r, c) = keep + h;
        const double lp = loss_of_out(net.forward(x, nullptr, true));
        w(r, c) = keep - h;
        const double lm = loss_of_out(net.forward(x, nullptr, true));
        w(r, c) = keep;
        num(r, c) = (lp - lm) / (2.0 * h);
      }
    }
    // Floored denominator: exactly-zero analytic/numeric pairs (a bias
    // feeding batchnorm) must not turn into 0/0 noise.
    const double scale =
        std::max(1e-3, g.cwiseAbs().maxCoeff() + num.cwiseAbs().maxCoeff());
    res.max_rel =
        std::max(res.max_rel, (g - num).cwiseAbs().maxCoeff() / scale);
  }
  return res;
}

void c04() {
  const auto t0 = clk::now();
  const auto quad_loss = [](const RMat& out) { return 0.5 * out.squaredNorm(); };
  const auto quad_grad = [](const RMat& out) { return RMat(out); };
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    Rng rng(40000 + static_cast<uint64_t>(s));
    const auto batch = [&](int rows, int cols) {
      RMat x(rows, cols);
      for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) x(i, j) = rng.gaussian();
      return x;
    };
    {  // dense + relu
      Network net({LayerSpec::dense(5, 8), LayerSpec::relu(),
                   LayerSpec::dense(8, 3)},
                  rng);
      worst = std::max(
          worst, grad_check(net, batch(6, 5), quad_loss, quad_grad).max_rel);
    }
    {  // batchnorm
      Network net({LayerSpec::dense(4, 6), LayerSpec::batchnorm(6),
                   LayerSpec::relu(), LayerSpec::dense(6, 2)},
                  rng);
      worst = std::max(
          worst, grad_check(net, batch(8, 4), quad_loss, quad_grad).max_rel);
    }
    {  // softmax head with cross-entropy
      Network net({LayerSpec::dense(5, 8), LayerSpec::relu(),
                   LayerSpec::dense(8, 4), LayerSpec::softmax()},
                  rng);
      std::vector<int> labels(6);
      for (int& l : labels) l = static_cast<int>(rng.integer(4));
      const auto loss = [&](const RMat& p) { return cross_entropy(p, labels); };
      const auto grad = [&](const RMat& p) {
        return cross_entropy_grad(p, labels);
      };
      worst =
          std::max(worst, grad_check(net, batch(6, 5), loss, grad).max_rel);
    }
    {  // powernorm
      Network net({LayerSpec::dense(4, 6), LayerSpec::relu(),
                   LayerSpec::powernorm(2.5), LayerSpec::dense(6, 3)},
                  rng);
      worst = std::max(
          worst, grad_check(net, batch(5, 4), quad_loss, quad_grad).max_rel);
    }
  }
  const double el = secs(t0);
  report(4, "layer-gradient-checks", worst <= 1e-4 && el < 30.0,
         fmt("max rel err %.2e (tol 1e-4), 4 stacks x 100 seeds, %.1f s "
             "(budget 30)",
             worst, el));
}

// ---------------------------------------------------------------------------
// 5. Classifier MI instrument: on a noiseless 16-message channel the trained
//    classifier's log M - CE must approach log M, and never exceed the
//    plug-in MI of its own decisions beyond statistical tolerance.
void c05() {
  Rng init = Rng::stream(505, StreamKind::Init);
  Rng data = Rng::stream(505, StreamKind::Message);
  const int m = 16;
  Network net({LayerSpec::dense(m, 64), LayerSpec::relu(),
               LayerSpec::dense(64, 8), LayerSpec::powernorm(1.0),
               LayerSpec::dense(8, 64), LayerSpec::relu(),
               LayerSpec::dense(64, m), LayerSpec::softmax()},
              init);
  const AdamConfig adam;
  for (int step = 0; step < 2000; ++step) {
    const std::vector<int> labels = sample_labels(128, m, data);
    const RMat x = one_hot(labels, m);
    Network::Tape tape;
    const RMat p = net.forward(x, &tape, true);
    net.zero_grads();
    net.backward(tape, cross_entropy_grad(p, labels));
    net.adam_step(adam);
  }
  const std::vector<int> labels = sample_labels(4096, m, data);
  const RMat p = net.infer(one_hot(labels, m));
  const double ce = cross_entropy(p, labels);
  const double bound = theorem1_bound(ce, m);
  const double plug = plug_in_mi(labels, argmax_rows(p), m);
  const double logm = std::log(static_cast<double>(m));
  report(5, "classifier-mi-bound",
         bound >= 0.95 * logm && bound <= plug + 0.02,
         fmt("log M - CE = %.4f nats (need >= %.4f), plug-in MI %.4f "
             "(bound may exceed it by <= 0.02)",
             bound, 0.95 * logm, plug));
}

// ---------------------------------------------------------------------------
// 6. The DV estimator against the closed-form Gaussian MI at three
//    correlations.
void c06() {
  const double rhos[] = {0.0, 0.5, 0.9};
  const double targets[] = {0.0, 0.1438, 0.8304};
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const auto t0 = clk::now();
    Rng data = Rng::stream(606 + static_cast<uint64_t>(i), StreamKind::Noise);
    const int n = 20000;
    RMat xs(n, 1), ys(n, 1);
    const double cross = std::sqrt(1.0 - rhos[i] * rhos[i]);
    for (int r = 0; r < n; ++r) {
      const double x = data.gaussian();
      xs(r, 0) = x;
      ys(r, 0) = rhos[i] * x + cross * data.gaussian();
    }
    Rng init = Rng::stream(606 + static_cast<uint64_t>(i), StreamKind::Init);
    Rng batches =
        Rng::stream(606 + static_cast<uint64_t>(i), StreamKind::Shuffle);
    MineEstimator est(1, 1, 100, init);
    const MiEstimate e =
        fit_estimator(est, xs, ys, 1000, 256, batches, AdamConfig{});
    const double el = secs(t0);
    const double err = std::abs(e.value - targets[i]);
    ok = ok && err <= 0.1 && el < 120.0;
    detail += fmt("rho %.1f: %.4f vs %.4f (err %.3f, %.0f s)%s", rhos[i],
                  e.value, targets[i], err, el, i < 2 ? "; " : "");
  }
  report(6, "dv-gaussian-oracle", ok, detail + "  (tol 0.1, 120 s each)");
}

// ---------------------------------------------------------------------------
// Windowed-mean plateau: first history index whose two adjacent 10-step
// i_ab means agree within 1% (same operationalization as the harness
// plateau metric; per-step estimates carry Monte Carlo jitter of a few
// percent, so consecutive samples can never clear a pointwise 1% gate).
int plateau_iteration(const std::vector<MineFjHistoryRow>& h) {
  const auto window_mean = [&](size_t from) {
    double s = 0.0;
    for (size_t t = from; t < from + 10; ++t) s += h[t].i_ab;
    return s / 10.0;
  };
  for (size_t k = 0; k + 20 <= h.size(); ++k) {
    const double head = window_mean(k);
    const double tail = window_mean(k + 10);
    if (std::abs(tail - head) < 0.01 * std::max(std::abs(head), 1e-12))
      return h[k].iteration;
  }
  return -1;
}

// 7. The alternating MI-trained jamming scheme must flatten its legitimate-
//    link MI curve within the iteration cap at the published operating point.
void c07() {
  const auto t0 = clk::now();
  MineFjConfig cfg;  // nt 10, nr 4, ne 4, snr 20 dB, 300-iteration cap
  const MineFjResult res = train_mine_fj(cfg);
  const int plateau = plateau_iteration(res.history);
  report(7, "mi-training-plateau", plateau >= 0,
         fmt("i_ab 10-step means agree within 1%% from iteration %d "
             "(cap 300, best held-out at %d), %.0f s",
             plateau, res.best_iteration, secs(t0)));
}

// ---------------------------------------------------------------------------
// 8. Security effect of the learned FJ transceiver at desk scale.
double crossing_db(const std::vector<double>& snr,
                   const std::vector<double>& bler, double target) {
  for (size_t i = 1; i < snr.size(); ++i) {
    if (bler[i - 1] > target && bler[i] <= target) {
      const double l0 = std::log10(bler[i - 1]);
      const double l1 = std::log10(std::max(bler[i], 1e-9));
      return snr[i - 1] + (snr[i] - snr[i - 1]) * (std::log10(target) - l0) /
                              (l1 - l0);
    }
  }
  return std::nan("");
}

void c08() {
  const auto t0 = clk::now();
  // Operating point: 3 jamming dimensions against a 2-antenna eavesdropper
  // (it cannot cancel them), no security-loss mixing (alpha only trades
  // legitimate-link reliability for eavesdropper confusion the nullspace
  // geometry already provides here). The no-FJ reference trains with
  // identical hyperparameters, power share 1.0 on information.
  AefjConfig fj;
  fj.nt = 5;
  fj.nr = 2;
  fj.ne = 2;
  fj.alpha = 0.0;
  fj.fj_power_fraction = 0.5;
  fj.fj_pretrain_steps = 300;
  fj.epochs = 10;
  fj.batches_per_epoch = 1000;  // 1e4 training batches
  fj.seed = 7;
  AefjConfig plain = fj;
  plain.fj_power_fraction = 0.0;

  AefjModel m_fj = make_aefj(fj);
  train(m_fj);
  AefjModel m_pl = make_aefj(plain);
  train(m_pl);

  std::vector<double> grid;
  for (double s = 10.0; s <= 25.0 + 1e-9; s += 1.25) grid.push_back(s);
  const size_t trials = 20000;
  const BlerCurve rx_fj = eval_bler(m_fj, grid, trials, Receiver::Rx, 99);
  const BlerCurve ev_fj = eval_bler(m_fj, grid, trials, Receiver::Eve, 99);
  const BlerCurve rx_pl = eval_bler(m_pl, grid, trials, Receiver::Rx, 99);

  size_t i15 = 0;
  for (size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - 15.0) < 1e-9) i15 = i;
  const double ratio = ev_fj.bler[i15] / std::max(rx_fj.bler[i15], 1e-9);
  const double c_fj = crossing_db(grid, rx_fj.bler, 1e-2);
  const double c_pl = crossing_db(grid, rx_pl.bler, 1e-2);
  const double gap = c_fj - c_pl;
  const bool ok = ratio >= 10.0 && std::isfinite(c_fj) && std::isfinite(c_pl) &&
                  gap <= 6.0;
  report(8, "learned-fj-security", ok,
         fmt("eve/rx BLER at 15 dB: %.3f/%.4f = %.0fx (need >= 10); rx 1e-2 "
             "crossing %.1f dB vs no-FJ %.1f dB, gap %+.1f dB (tol 6); "
             "1e4 batches each, %.0f s",
             ev_fj.bler[i15], rx_fj.bler[i15], ratio, c_fj, c_pl, gap,
             secs(t0)));
}

// ---------------------------------------------------------------------------
// 9. More transmit antennas must buy strictly more mean secrecy, separated
//    by non-overlapping 2-standard-error intervals.
void c09() {
  const double p_total = std::pow(10.0, 1.5);  // 15 dB over unit noise
  const int nts[] = {2, 4, 6, 8};
  std::vector<double> means, halfwidths;
  for (const int nt : nts) {
    const auto tag = static_cast<uint64_t>(nt);
    Rng ch = Rng::stream(909, StreamKind::Channel, tag);
    Rng ev = Rng::stream(909, StreamKind::Eavesdropper, tag);
    Rng ce = Rng::stream(909, StreamKind::CsiError, tag);
    const size_t n = 10000;
    std::vector<ChannelDraw> draws;
    std::vector<CsiState> csi;
    draws.reserve(n);
    csi.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      draws.push_back(
          {sample_channel(nt, 2, ch), sample_channel(nt, 2, ev), 1.0, 1.0});
      csi.push_back(make_csi(draws.back(), CsiMode::Perfect, 0.0, ce));
    }
    const PowerSplitResult ps = exhaustive_power_split(draws, csi, p_total, 21);
    const SecrecyStats st = average_secrecy(n, [&](size_t i) {
      return split_secrecy(draws[i], csi[i], ps.phi_star, p_total);
    });
    means.push_back(st.mean);
    halfwidths.push_back(2.0 * st.stderr_mean);
  }
  bool ok = true;
  std::string detail;
  for (size_t i = 0; i < means.size(); ++i) {
    if (i > 0)
      ok = ok && means[i] > means[i - 1] &&
           means[i] - halfwidths[i] > means[i - 1] + halfwidths[i - 1];
    detail += fmt("nt%d %.3f+-%.3f%s", nts[i], means[i], halfwidths[i],
                  i + 1 < means.size() ? " < " : "");
  }
  report(9, "secrecy-vs-antennas", ok,
         detail + fmt("  (nats, +-2se, 1e4 draws each, 15 dB)"));
}

// ---------------------------------------------------------------------------
// 10. Leaning the MI objective toward the legitimate link (beta 0.7 vs 0.3)
//     must converge to more guaranteed secrecy, compared under paired seeds.
void c10() {
  const auto t0 = clk::now();
  const uint64_t seeds[] = {3, 5};
  bool ok = true;
  std::string detail;
  for (const uint64_t seed : seeds) {
    double proxy[2] = {0.0, 0.0};
    const double betas[] = {0.7, 0.3};
    for (int b = 0; b < 2; ++b) {
      MineFjConfig cfg;
      cfg.nt = 3;
      cfg.nr = 2;
      cfg.ne = 2;
      cfg.batch = 20000;
      cfg.iterations = 40;
      cfg.beta = betas[b];
      cfg.seed = seed;
      const MineFjResult res = train_mine_fj(cfg);
      double tail = 0.0;  // converged proxy: mean gsc over the last 10
      for (size_t i = res.history.size() - 10; i < res.history.size(); ++i)
        tail += res.history[i].gsc;
      proxy[b] = tail / 10.0;
    }
    ok = ok && proxy[0] > proxy[1];
    detail += fmt("seed %llu: %.3f > %.3f%s;  ",
                  static_cast<unsigned long long>(seed), proxy[0], proxy[1],
                  proxy[0] > proxy[1] ? "" : " VIOLATED");
  }
  report(10, "beta-tradeoff-direction", ok,
         detail + fmt("(tail-10 gsc, nt3 batch 20000, %.0f s)", secs(t0)));
}

// ---------------------------------------------------------------------------
// 11. The learned jamming design must stay close to the exhaustive
//     power-split optimum on paired channel draws.
void c11() {
  const auto t0 = clk::now();
  AefjConfig cfg;  // nt 4, nr 2, ne 2, perfect CSI, 1e3 training batches
  AefjModel model = make_aefj(cfg);
  train(model);
  const double p_total = std::pow(10.0, 1.5);  // 15 dB
  Rng ch = Rng::stream(1111, StreamKind::Channel);
  Rng ev = Rng::stream(1111, StreamKind::Eavesdropper);
  Rng ce = Rng::stream(1111, StreamKind::CsiError);
  const size_t n = 10000;
  std::vector<ChannelDraw> draws;
  std::vector<CsiState> csi;
  draws.reserve(n);
  csi.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    draws.push_back(
        {sample_channel(4, 2, ch), sample_channel(4, 2, ev), 1.0, 1.0});
    csi.push_back(make_csi(draws.back(), CsiMode::Perfect, 0.0, ce));
  }
  const PowerSplitResult ps = exhaustive_power_split(draws, csi, p_total, 101);
  const SecrecyStats ae = average_secrecy(n, [&](size_t i) {
    return design_secrecy(model, draws[i], csi[i], p_total);
  });
  const double ratio = ae.mean / ps.mean_rs;
  report(11, "learned-vs-exhaustive", ratio >= 0.85,
         fmt("learned mean %.3f vs exhaustive %.3f nats = %.1f%% "
             "(need >= 85%%), 1e4 paired draws, 15 dB, %.0f s",
             ae.mean, ps.mean_rs, 100.0 * ratio, secs(t0)));
}

// ---------------------------------------------------------------------------
// 12. FLOP accounting of the published dense stack under both counting
//     conventions, exact integers.
void c12() {
  const FlopsReport rep = flops(published_flops_stack());
  const bool ok = rep.total_text == 5992 && rep.total_table == 6144;
  report(12, "flops-conventions", ok,
         fmt("(2*in-1)*out total %lld (need 5992), 2*in*out total %lld "
             "(need 6144), conventions differ by %lld",
             rep.total_text, rep.total_table,
             rep.total_table - rep.total_text));
}

// ---------------------------------------------------------------------------
// 13. Byte-identical re-runs: same config + seed => same results.csv, for
//     both a Monte Carlo experiment and a training experiment.
void c13() {
  const fs::path base = fs::temp_directory_path() / "fjsec_acceptance";
  fs::remove_all(base);
  const char* conv_cfg = R"({
    "experiment": "secrecy_vs_snr", "scheme": "conventional_exhaustive",
    "antennas": {"nt": 3, "nr": 2, "ne": 2},
    "snr_grid_db": [0, 10], "mc_draws": 200, "seed": 11,
    "phi_grid_steps": 11})";
  const char* mine_cfg = R"({
    "experiment": "mine_convergence", "scheme": "mine_fj",
    "antennas": {"nt": 4, "nr": 2, "ne": 2},
    "snr_grid_db": [15], "mc_draws": 100, "seed": 5,
    "train": {"iterations": 30, "batch": 48, "est_steps": 2,
              "hidden": 24, "eval_batch": 64, "m": 8}})";
  bool ok = true;
  std::string detail;
  const std::pair<const char*, const char*> cases[] = {
      {"conventional sweep", conv_cfg}, {"mi-training curves", mine_cfg}};
  for (const auto& [label, text] : cases) {
    const ExperimentConfig cfg = parse_run_config(text);
    const fs::path a = base / label / "a";
    const fs::path b = base / label / "b";
    run_experiment(cfg, a.string());
    run_experiment(cfg, b.string());
    const std::string da = file_digest_hex((a / "results.csv").string());
    const std::string db = file_digest_hex((b / "results.csv").string());
    ok = ok && da == db;
    detail += fmt("%s %s%s", label, da == db ? "identical" : "DIFFER",
                  std::string(label) == "conventional sweep" ? "; " : "");
  }
  report(13, "byte-identical-reruns", ok, detail + " (fnv1a64 over results.csv)");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> want;
  for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
  const auto t0 = clk::now();
  struct Entry {
    int id;
    void (*fn)();
  };
  const Entry all[] = {{1, c01}, {2, c02},  {3, c03},  {4, c04},  {5, c05},
                       {6, c06}, {7, c07},  {8, c08},  {9, c09},  {10, c10},
                       {11, c11}, {12, c12}, {13, c13}};
  for (const Entry& e : all) {
    if (!want.empty() && !want.count(e.id)) continue;
    try {
      e.fn();
    } catch (const std::exception& ex) {
      report(e.id, "exception", false, ex.what());
    }
  }
  std::printf("ACCEPTANCE: %d/%d criteria pass (%.0f s)\n", g_pass,
              g_pass + g_fail, secs(t0));
  return g_fail == 0 ? 0 : 1;
}
