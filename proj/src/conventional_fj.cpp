#include "fjsec/conventional_fj.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace fjsec {

FjDesign design_fj(const CMat& h_design, double sigma_v2, double tol) {
  if (sigma_v2 < 0.0)
    throw std::invalid_argument("design_fj: sigma_v2 must be >= 0");
  FjDesign d;
  d.z = nullspace_basis(h_design.adjoint(), tol);
  d.n_fj = static_cast<int>(d.z.cols());
  d.sigma_v2 = d.n_fj > 0 ? sigma_v2 : 0.0;
  return d;
}

CVec sample_fj(const FjDesign& design, Rng& rng) {
  if (design.n_fj == 0) return CVec::Zero(design.z.rows());
  CVec v(design.n_fj);
  for (int i = 0; i < design.n_fj; ++i) v(i) = rng.cgaussian(design.sigma_v2);
  return design.z * v;
}

CMat eve_noise_cov(const CMat& g, const FjDesign& design, double sigma_e2) {
  if (sigma_e2 < 0.0)
    throw std::invalid_argument("eve_noise_cov: sigma_e2 must be >= 0");
  const Eigen::Index ne = g.cols();
  CMat k = sigma_e2 * CMat::Identity(ne, ne);
  if (design.n_fj > 0) {
    const CMat gz = g.adjoint() * design.z;
    k += design.sigma_v2 * gz * gz.adjoint();
  }
  return k;
}

PowerAllocation waterfill(const RVec& gains, double p_info) {
  if (gains.size() == 0) throw std::invalid_argument("waterfill: empty gains");
  if (!(p_info > 0.0))
    throw std::invalid_argument("waterfill: p_info must be > 0");
  for (Eigen::Index i = 0; i < gains.size(); ++i) {
    if (!(gains(i) > 0.0) || !std::isfinite(gains(i)))
      throw std::invalid_argument("waterfill: gains must be positive finite");
    if (i > 0 && gains(i) > gains(i - 1) + 1e-12)
      throw std::invalid_argument("waterfill: gains must be descending");
  }
  const Eigen::Index n = gains.size();
  PowerAllocation a;
  a.per_stream = RVec::Zero(n);
  a.p_info = p_info;
  a.p_total = p_info;
  // Largest k with water level mu above 1/gains(k-1).
  double inv_sum = 0.0;
  Eigen::Index active = 0;
  double mu = 0.0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    inv_sum += 1.0 / gains(k - 1);
    const double cand = (p_info + inv_sum) / static_cast<double>(k);
    if (cand > 1.0 / gains(k - 1)) {
      active = k;
      mu = cand;
    }
  }
  for (Eigen::Index i = 0; i < active; ++i)
    a.per_stream(i) = std::max(0.0, mu - 1.0 / gains(i));
  return a;
}

PowerAllocation zero_allocation(Eigen::Index streams) {
  PowerAllocation a;
  a.per_stream = RVec::Zero(streams);
  return a;
}

namespace {

// q_s = v diag(p) v^H restricted to the allocated streams.
CMat signal_covariance(const CMat& v_full, const PowerAllocation& alloc) {
  const Eigen::Index nt = v_full.rows();
  const Eigen::Index k = std::min<Eigen::Index>(alloc.per_stream.size(), nt);
  CMat q = CMat::Zero(nt, nt);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (alloc.per_stream(i) > 0.0)
      q += alloc.per_stream(i) * v_full.col(i) * v_full.col(i).adjoint();
  }
  return q;
}

double eve_rate(const ChannelDraw& draw, const FjDesign& design,
                const CMat& q_s) {
  const CMat k = eve_noise_cov(draw.g, design, draw.sigma_e2);
  const CMat f = draw.g.adjoint() * q_s * draw.g;
  return logdet_hpd(k + f) - logdet_hpd(k);
}

}  // namespace

SecrecySample secrecy_rate_perfect(const ChannelDraw& draw,
                                   const PowerAllocation& alloc,
                                   const FjDesign& design) {
  const SvdResult dec = svd(draw.h.adjoint());
  SecrecySample s;
  const Eigen::Index streams =
      std::min<Eigen::Index>(dec.sigma.size(), alloc.per_stream.size());
  for (Eigen::Index i = 0; i < streams; ++i) {
    const double gain = dec.sigma(i) * dec.sigma(i);
    s.r_ab += std::log1p(gain * alloc.per_stream(i) / draw.sigma_b2);
  }
  const CMat q_s = signal_covariance(dec.v, alloc);
  s.r_ae = eve_rate(draw, design, q_s);
  s.r_s = std::max(0.0, s.r_ab - s.r_ae);
  return s;
}

SecrecySample secrecy_rate_imcsi(const ChannelDraw& draw, const CsiState& csi,
                                 const PowerAllocation& alloc,
                                 const FjDesign& design) {
  if (csi.h_hat.size() == 0)
    throw std::invalid_argument("secrecy_rate_imcsi: csi carries no estimate");
  const SvdResult dec = svd(csi.h_hat.adjoint());
  const CMat q_s = signal_covariance(dec.v, alloc);
  const CMat dh = csi.h_hat - draw.h;
  const Eigen::Index nr = draw.h.cols();
  CMat d = draw.sigma_b2 * CMat::Identity(nr, nr);
  if (design.n_fj > 0) {
    const CMat leak = dh.adjoint() * design.z;
    d += design.sigma_v2 * leak * leak.adjoint();
  }
  const CMat sig = draw.h.adjoint() * q_s * draw.h;
  SecrecySample s;
  s.r_ab = logdet_hpd(d + sig) - logdet_hpd(d);
  s.r_ae = eve_rate(draw, design, q_s);
  s.r_s = std::max(0.0, s.r_ab - s.r_ae);
  return s;
}

GscResult gsc(double i_ab, const CMat& g, const FjDesign& design,
              const CMat& q_s) {
  GscResult r;
  if (design.n_fj == 0) {
    r.used_pseudo_det = true;
    r.value = 0.0;
    return r;
  }
  const CMat gz = g.adjoint() * design.z;
  const CMat kp = design.sigma_v2 * gz * gz.adjoint();
  const CMat f = g.adjoint() * q_s * g;
  Eigen::SelfAdjointEigenSolver<CMat> es(kp);
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double tol = 1e-12 * std::max(emax, 1.0);
  const Eigen::Index rank =
      (es.eigenvalues().array() > tol).count();
  double eve_term;
  if (rank == kp.rows()) {
    eve_term = logdet_hpd(kp + f) - logdet_hpd(kp);
  } else {
    r.used_pseudo_det = true;
    if (rank == 0) {
      eve_term = 0.0;
    } else {
      const CMat basis = es.eigenvectors().rightCols(rank);
      eve_term = logdet_hpd(basis.adjoint() * (kp + f) * basis) -
                 logdet_hpd(basis.adjoint() * kp * basis);
    }
  }
  r.value = std::max(0.0, i_ab - std::max(0.0, eve_term));
  return r;
}

double split_secrecy(const ChannelDraw& draw, const CsiState& csi, double phi,
                     double p_total, double tol) {
  if (phi < 0.0 || phi > 1.0)
    throw std::invalid_argument("split_secrecy: phi must be in [0, 1]");
  const CMat& h_design = (csi.mode == CsiMode::Statistical) ? csi.h_hat : draw.h;
  const SvdResult dec = svd(h_design.adjoint());
  RVec gains(dec.sigma.size());
  for (Eigen::Index i = 0; i < gains.size(); ++i)
    gains(i) = dec.sigma(i) * dec.sigma(i);
  const int n_fj =
      static_cast<int>(h_design.rows()) -
      static_cast<int>((dec.sigma.array() > tol * dec.sigma(0)).count());
  const double p_info = phi * p_total;
  const double sigma_v2 =
      n_fj > 0 ? (1.0 - phi) * p_total / static_cast<double>(n_fj) : 0.0;
  const FjDesign design = design_fj(h_design, sigma_v2, tol);
  PowerAllocation alloc = p_info > 0.0 ? waterfill(gains, p_info)
                                       : zero_allocation(gains.size());
  alloc.p_total = p_total;
  const SecrecySample s = (csi.mode == CsiMode::Statistical)
                              ? secrecy_rate_imcsi(draw, csi, alloc, design)
                              : secrecy_rate_perfect(draw, alloc, design);
  return s.r_s;
}

PowerSplitResult exhaustive_power_split(const std::vector<ChannelDraw>& draws,
                                        const std::vector<CsiState>& csi,
                                        double p_total, int grid_steps,
                                        int workers) {
  if (draws.empty())
    throw std::invalid_argument("exhaustive_power_split: empty ensemble");
  if (csi.size() != draws.size())
    throw std::invalid_argument("exhaustive_power_split: csi size mismatch");
  if (grid_steps < 2)
    throw std::invalid_argument("exhaustive_power_split: grid_steps < 2");
  if (!(p_total > 0.0))
    throw std::invalid_argument("exhaustive_power_split: p_total must be > 0");
  std::vector<std::vector<double>> per_draw(draws.size());
  parallel_for(draws.size(), workers, [&](size_t i) {
    std::vector<double> row(grid_steps);
    for (int jj = 0; jj < grid_steps; ++jj) {
      const double phi = static_cast<double>(jj) / (grid_steps - 1);
      row[jj] = split_secrecy(draws[i], csi[i], phi, p_total);
    }
    per_draw[i] = std::move(row);
  });
  PowerSplitResult best;
  best.mean_rs = -1.0;
  for (int jj = 0; jj < grid_steps; ++jj) {
    std::vector<double> col(draws.size());
    for (size_t i = 0; i < draws.size(); ++i) col[i] = per_draw[i][jj];
    const double mean = pairwise_sum(col) / static_cast<double>(col.size());
    if (mean > best.mean_rs) {
      best.mean_rs = mean;
      best.phi_star = static_cast<double>(jj) / (grid_steps - 1);
    }
  }
  return best;
}

double pairwise_sum(const std::vector<double>& xs) {
  // Fixed-topology pairwise reduction: order independent of thread count.
  std::function<double(size_t, size_t)> rec = [&](size_t lo,
                                                  size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (size_t i = lo; i < hi; ++i) s += xs[i];
      return s;
    }
    const size_t mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return xs.empty() ? 0.0 : rec(0, xs.size());
}

void parallel_for(size_t n, int workers,
                  const std::function<void(size_t)>& body) {
  if (workers <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const size_t nw = std::min<size_t>(workers, n);
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  pool.reserve(nw);
  for (size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) break;
        try {
          body(i);
        } catch (...) {
          failed.store(true);
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load())
    throw std::runtime_error("parallel_for: worker task failed");
}

SecrecyStats average_secrecy(size_t n, const std::function<double(size_t)>& fn,
                             int workers) {
  if (n == 0) throw std::invalid_argument("average_secrecy: empty ensemble");
  std::vector<double> vals(n);
  parallel_for(n, workers, [&](size_t i) { vals[i] = fn(i); });
  SecrecyStats st;
  st.n = n;
  st.mean = pairwise_sum(vals) / static_cast<double>(n);
  if (n > 1) {
    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) {
      const double d = vals[i] - st.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    st.stderr_mean = std::sqrt(var / static_cast<double>(n));
  }
  return st;
}

}  // namespace fjsec
