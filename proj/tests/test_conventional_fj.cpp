#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fjsec/channel.hpp"
#include "fjsec/conventional_fj.hpp"

using namespace fjsec;

namespace {

CMat signal_cov_oracle(const CMat& h_design, const PowerAllocation& alloc) {
  const SvdResult d = svd(h_design.adjoint());
  CMat q = CMat::Zero(h_design.rows(), h_design.rows());
  for (Eigen::Index i = 0;
       i < std::min<Eigen::Index>(alloc.per_stream.size(), d.sigma.size()); ++i)
    q += alloc.per_stream(i) * d.v.col(i) * d.v.col(i).adjoint();
  return q;
}

// Unprecoded-form rates: the general logdet expressions evaluated directly
// on the channel matrices, independent of the parallel-stream shortcut.
SecrecySample rate_oracle(const ChannelDraw& draw, const PowerAllocation& alloc,
                          const FjDesign& design) {
  const CMat q_s = signal_cov_oracle(draw.h, alloc);
  const Eigen::Index nr = draw.h.cols();
  SecrecySample s;
  s.r_ab = logdet_hpd(CMat::Identity(nr, nr) +
                      draw.h.adjoint() * q_s * draw.h / draw.sigma_b2);
  const CMat k = eve_noise_cov(draw.g, design, draw.sigma_e2);
  s.r_ae = logdet_hpd(k + draw.g.adjoint() * q_s * draw.g) - logdet_hpd(k);
  s.r_s = std::max(0.0, s.r_ab - s.r_ae);
  return s;
}

double waterfill_objective(const RVec& gains, const RVec& p) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < gains.size(); ++i)
    acc += std::log1p(gains(i) * p(i));
  return acc;
}

}  // namespace

TEST_CASE("design_fj dimensions and orthogonality") {
  Rng rng(201);
  const CMat h = sample_channel(6, 2, rng);
  const FjDesign d = design_fj(h, 0.7);
  CHECK(d.n_fj == 4);
  CHECK(d.sigma_v2 == 0.7);
  CHECK((h.adjoint() * d.z).norm() <= 1e-10 * h.norm());
  CHECK((d.z.adjoint() * d.z - CMat::Identity(4, 4)).norm() <= 1e-12);
  // square full-rank channel: no nullspace to jam into
  const CMat hs = sample_channel(3, 3, rng);
  const FjDesign ds = design_fj(hs, 0.7);
  CHECK(ds.n_fj == 0);
  CHECK(ds.sigma_v2 == 0.0);
}

TEST_CASE("sample_fj power matches n_fj * sigma_v2") {
  Rng rng(202);
  const CMat h = sample_channel(5, 2, rng);
  const FjDesign d = design_fj(h, 0.4);
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) acc += sample_fj(d, rng).squaredNorm();
  CHECK(acc / n == doctest::Approx(d.n_fj * d.sigma_v2).epsilon(0.03));
}

TEST_CASE("eve_noise_cov matches Monte Carlo covariance") {
  Rng rng(203);
  const ChannelDraw draw = sample_draw(4, 2, 2, 1.0, 0.5, rng);
  const FjDesign d = design_fj(draw.h, 0.8);
  const CMat k = eve_noise_cov(draw.g, d, draw.sigma_e2);
  CMat acc = CMat::Zero(2, 2);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const CVec w = sample_fj(d, rng);
    CVec r = draw.g.adjoint() * w;
    for (Eigen::Index j = 0; j < 2; ++j) r(j) += rng.cgaussian(draw.sigma_e2);
    acc += r * r.adjoint();
  }
  acc /= static_cast<double>(n);
  CHECK((acc - k).norm() <= 0.02 * k.norm());
}

TEST_CASE("waterfill splits power across two streams") {
  RVec gains(2);
  gains << 4.0, 1.0;
  const PowerAllocation a = waterfill(gains, 1.0);
  CHECK(a.per_stream(0) == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(a.per_stream(1) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(a.per_stream.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // water level mu = p(i) + 1/g(i) on active streams
  CHECK(a.per_stream(0) + 1.0 / gains(0) == doctest::Approx(1.125));
  CHECK(a.per_stream(1) + 1.0 / gains(1) == doctest::Approx(1.125));
}

TEST_CASE("waterfill drops weak streams") {
  RVec gains(2);
  gains << 10.0, 0.01;
  const PowerAllocation a = waterfill(gains, 0.05);
  CHECK(a.per_stream(0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(a.per_stream(1) == 0.0);
}

TEST_CASE("waterfill beats a fine grid oracle") {
  Rng rng(204);
  for (int trial = 0; trial < 100; ++trial) {
    RVec gains(3);
    gains << 0.2 + 3.0 * rng.uniform(), 0.1 + 1.0 * rng.uniform(),
        0.02 + 0.5 * rng.uniform();
    std::sort(gains.data(), gains.data() + 3, std::greater<double>());
    const double p_info = 0.5 + 4.0 * rng.uniform();
    const PowerAllocation a = waterfill(gains, p_info);
    CHECK(a.per_stream.minCoeff() >= 0.0);
    CHECK(a.per_stream.sum() == doctest::Approx(p_info).epsilon(1e-9));
    const double mine = waterfill_objective(gains, a.per_stream);
    // exhaustive 2-simplex grid at p_info/400 resolution
    const int steps = 400;
    double best = 0.0;
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; i + j <= steps; ++j) {
        RVec p(3);
        p << p_info * i / steps, p_info * j / steps,
            p_info * (steps - i - j) / steps;
        best = std::max(best, waterfill_objective(gains, p));
      }
    }
    CHECK(mine >= best - 1e-9);
  }
}

TEST_CASE("waterfill argument validation") {
  RVec empty;
  CHECK_THROWS_AS(waterfill(empty, 1.0), std::invalid_argument);
  RVec g(1);
  g << 1.0;
  CHECK_THROWS_AS(waterfill(g, 0.0), std::invalid_argument);
  RVec asc(2);
  asc << 1.0, 2.0;
  CHECK_THROWS_AS(waterfill(asc, 1.0), std::invalid_argument);
  RVec neg(2);
  neg << 1.0, -1.0;
  CHECK_THROWS_AS(waterfill(neg, 1.0), std::invalid_argument);
}

TEST_CASE("parallel-stream form agrees with unprecoded-form oracle") {
  Rng rng(205);
  for (int trial = 0; trial < 500; ++trial) {
    const int nt = 2 + static_cast<int>(rng.integer(5));  // up to 6
    const int nr = 1 + static_cast<int>(rng.integer(std::min(nt, 4)));
    const int ne = 1 + static_cast<int>(rng.integer(3));
    Rng draw_rng = Rng::stream(206, StreamKind::Channel, trial);
    ChannelDraw draw = sample_draw(nt, nr, ne, 1.0, 0.3 + rng.uniform(), draw_rng);
    const FjDesign design = design_fj(draw.h, 0.1 + rng.uniform());
    const SvdResult dec = svd(draw.h.adjoint());
    RVec gains(dec.sigma.size());
    for (Eigen::Index i = 0; i < gains.size(); ++i)
      gains(i) = dec.sigma(i) * dec.sigma(i);
    const PowerAllocation alloc = waterfill(gains, 0.5 + 5.0 * rng.uniform());
    const SecrecySample fast = secrecy_rate_perfect(draw, alloc, design);
    const SecrecySample slow = rate_oracle(draw, alloc, design);
    CHECK(std::abs(fast.r_ab - slow.r_ab) <= 1e-8);
    CHECK(std::abs(fast.r_ae - slow.r_ae) <= 1e-8);
    CHECK(std::abs(fast.r_s - slow.r_s) <= 1e-8);
  }
}

TEST_CASE("perfect-CSI jamming does not touch the legitimate rate") {
  Rng rng(207);
  const ChannelDraw draw = sample_draw(4, 2, 2, 1.0, 1.0, rng);
  const SvdResult dec = svd(draw.h.adjoint());
  RVec gains = dec.sigma.array().square();
  const PowerAllocation alloc = waterfill(gains, 2.0);
  const SecrecySample with_fj =
      secrecy_rate_perfect(draw, alloc, design_fj(draw.h, 5.0));
  const SecrecySample no_fj =
      secrecy_rate_perfect(draw, alloc, design_fj(draw.h, 0.0));
  CHECK(with_fj.r_ab == doctest::Approx(no_fj.r_ab).epsilon(1e-12));
  CHECK(with_fj.r_ae < no_fj.r_ae);
}

TEST_CASE("zero signal power gives zero rates") {
  Rng rng(208);
  const ChannelDraw draw = sample_draw(4, 2, 2, 1.0, 1.0, rng);
  const FjDesign design = design_fj(draw.h, 1.0);
  const PowerAllocation alloc = zero_allocation(2);
  const SecrecySample s = secrecy_rate_perfect(draw, alloc, design);
  CHECK(s.r_ab == 0.0);
  CHECK(s.r_ae == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.r_s == 0.0);
}

TEST_CASE("zero eavesdropper channel gives r_ae = 0") {
  Rng rng(209);
  ChannelDraw draw = sample_draw(4, 2, 2, 1.0, 1.0, rng);
  draw.g = CMat::Zero(4, 2);
  const FjDesign design = design_fj(draw.h, 1.0);
  const SvdResult dec = svd(draw.h.adjoint());
  RVec gains = dec.sigma.array().square();
  const PowerAllocation alloc = waterfill(gains, 2.0);
  const SecrecySample s = secrecy_rate_perfect(draw, alloc, design);
  CHECK(s.r_ae == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.r_s == doctest::Approx(s.r_ab).epsilon(1e-12));
}

TEST_CASE("imcsi with zero estimation error reduces to the perfect rate") {
  Rng rng(210);
  const ChannelDraw draw = sample_draw(5, 2, 2, 1.0, 1.0, rng);
  CsiState csi;
  csi.mode = CsiMode::Statistical;
  csi.rho_e2 = 0.0;
  csi.h_hat = draw.h;
  const FjDesign design = design_fj(csi.h_hat, 0.9);
  const SvdResult dec = svd(draw.h.adjoint());
  RVec gains = dec.sigma.array().square();
  const PowerAllocation alloc = waterfill(gains, 3.0);
  const SecrecySample im = secrecy_rate_imcsi(draw, csi, alloc, design);
  const SecrecySample pf = secrecy_rate_perfect(draw, alloc, design);
  CHECK(std::abs(im.r_ab - pf.r_ab) <= 1e-10);
  CHECK(std::abs(im.r_ae - pf.r_ae) <= 1e-10);
  CHECK(std::abs(im.r_s - pf.r_s) <= 1e-10);
}

TEST_CASE("imcsi with zero jamming power has no leakage term") {
  Rng rng(211);
  const ChannelDraw draw = sample_draw(5, 2, 2, 1.0, 1.0, rng);
  Rng prng(212);
  CsiState csi;
  csi.mode = CsiMode::Statistical;
  csi.rho_e2 = 0.05;
  csi.h_hat = perturb(draw.h, 0.05, prng).first;
  const FjDesign design = design_fj(csi.h_hat, 0.0);
  const SvdResult dec = svd(csi.h_hat.adjoint());
  RVec gains = dec.sigma.array().square();
  const PowerAllocation alloc = waterfill(gains, 3.0);
  const SecrecySample im = secrecy_rate_imcsi(draw, csi, alloc, design);
  // oracle: no-jamming rate through the true channel with the mismatched
  // precoder
  const CMat q_s = signal_cov_oracle(csi.h_hat, alloc);
  const CMat sig = draw.h.adjoint() * q_s * draw.h;
  const double expect =
      logdet_hpd(CMat::Identity(2, 2) + sig / draw.sigma_b2);
  CHECK(im.r_ab == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("mean secrecy decreases as CSI error grows") {
  const int n = 10000;
  const double p_total = 10.0;
  std::vector<double> rho = {0.0, 0.01, 0.1};
  std::vector<std::vector<double>> rs(rho.size(), std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    Rng drng = Rng::stream(213, StreamKind::Channel, i);
    const ChannelDraw draw = sample_draw(4, 2, 2, 1.0, 1.0, drng);
    Rng erng = Rng::stream(213, StreamKind::CsiError, i);
    const CMat err = sample_channel(4, 2, erng, 1.0);  // shared error shape
    for (size_t r = 0; r < rho.size(); ++r) {
      CsiState csi;
      csi.mode = CsiMode::Statistical;
      csi.rho_e2 = rho[r];
      csi.h_hat = draw.h + std::sqrt(rho[r]) * err;
      rs[r][i] = split_secrecy(draw, csi, 0.6, p_total);
    }
  }
  for (size_t r = 0; r + 1 < rho.size(); ++r) {
    double mean_d = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) mean_d += rs[r][i] - rs[r + 1][i];
    mean_d /= n;
    for (int i = 0; i < n; ++i) {
      const double d = rs[r][i] - rs[r + 1][i] - mean_d;
      sq += d * d;
    }
    const double se = std::sqrt(sq / (n - 1.0) / n);
    CHECK(mean_d > 3.0 * se);
  }
}

TEST_CASE("gsc matches the zero-noise limit of the eavesdropper term") {
  Rng rng(214);
  // n_fj >= n_e so the jamming covariance is full rank at the eavesdropper
  ChannelDraw draw = sample_draw(6, 2, 2, 1.0, 1.0, rng);
  const FjDesign design = design_fj(draw.h, 0.7);
  const SvdResult dec = svd(draw.h.adjoint());
  RVec gains = dec.sigma.array().square();
  const PowerAllocation alloc = waterfill(gains, 2.0);
  const CMat q_s = signal_cov_oracle(draw.h, alloc);
  const double i_ab = secrecy_rate_perfect(draw, alloc, design).r_ab;
  const GscResult g = gsc(i_ab, draw.g, design, q_s);
  CHECK_FALSE(g.used_pseudo_det);
  ChannelDraw tiny = draw;
  tiny.sigma_e2 = 1e-9;
  const SecrecySample s = secrecy_rate_perfect(tiny, alloc, design);
  CHECK(g.value == doctest::Approx(std::max(0.0, i_ab - s.r_ae)).epsilon(1e-5));
}

TEST_CASE("gsc with zero signal covariance returns i_ab") {
  Rng rng(215);
  const ChannelDraw draw = sample_draw(4, 2, 3, 1.0, 1.0, rng);
  const FjDesign design = design_fj(draw.h, 0.7);
  const CMat q0 = CMat::Zero(4, 4);
  const GscResult g = gsc(1.23, draw.g, design, q0);
  CHECK(g.value == doctest::Approx(1.23).epsilon(1e-12));
  // n_fj = 2 < n_e = 3 forces the rank-deficient path
  CHECK(g.used_pseudo_det);
}

TEST_CASE("gsc shrinks to zero without jamming dimensions") {
  Rng rng(216);
  const ChannelDraw draw = sample_draw(2, 2, 2, 1.0, 1.0, rng);
  const FjDesign design = design_fj(draw.h, 0.7);
  REQUIRE(design.n_fj == 0);
  const GscResult g = gsc(2.0, draw.g, design, CMat::Identity(2, 2));
  CHECK(g.value == 0.0);
  CHECK(g.used_pseudo_det);
}

TEST_CASE("exhaustive split equals explicit enumeration on a single draw") {
  Rng rng(217);
  const ChannelDraw draw = sample_draw(4, 2, 2, 1.0, 1.0, rng);
  const CsiState csi{CsiMode::Perfect, 0.0, draw.h};
  const double p_total = 8.0;
  const PowerSplitResult r =
      exhaustive_power_split({draw}, {csi}, p_total, 11);
  double best = -1.0, best_phi = 0.0;
  for (int j = 0; j < 11; ++j) {
    const double phi = j / 10.0;
    const double v = split_secrecy(draw, csi, phi, p_total);
    if (v > best) {
      best = v;
      best_phi = phi;
    }
  }
  CHECK(r.mean_rs == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.phi_star == doctest::Approx(best_phi).epsilon(1e-12));
}

TEST_CASE("power accounting: split uses the full budget") {
  Rng rng(218);
  const ChannelDraw draw = sample_draw(5, 2, 2, 1.0, 1.0, rng);
  const double p_total = 6.0;
  const double phi = 0.7;
  const SvdResult dec = svd(draw.h.adjoint());
  RVec gains = dec.sigma.array().square();
  const PowerAllocation alloc = waterfill(gains, phi * p_total);
  const int n_fj = 3;
  const double sigma_v2 = (1.0 - phi) * p_total / n_fj;
  // trace(q_s) + n_fj sigma_v2 = p_total
  const CMat q_s = signal_cov_oracle(draw.h, alloc);
  CHECK(q_s.trace().real() + n_fj * sigma_v2 ==
        doctest::Approx(p_total).epsilon(1e-9));
}

TEST_CASE("average_secrecy is deterministic across worker counts") {
  auto fn = [](size_t i) {
    Rng rng = Rng::stream(219, StreamKind::Channel, i);
    const ChannelDraw draw = sample_draw(4, 2, 2, 1.0, 1.0, rng);
    const CsiState csi{CsiMode::Perfect, 0.0, draw.h};
    return split_secrecy(draw, csi, 0.6, 10.0);
  };
  const SecrecyStats s1 = average_secrecy(500, fn, 1);
  const SecrecyStats s4 = average_secrecy(500, fn, 4);
  CHECK(s1.mean == s4.mean);
  CHECK(s1.stderr_mean == s4.stderr_mean);
  CHECK(s1.n == 500);
  CHECK(s1.mean > 0.0);
  CHECK(s1.stderr_mean > 0.0);
  CHECK(s1.stderr_mean < s1.mean);
}

TEST_CASE("per-realization clamp: r_s never negative") {
  Rng rng(220);
  for (int i = 0; i < 200; ++i) {
    // strong eavesdropper (n_e = 4) makes negative gaps common
    const ChannelDraw draw = sample_draw(3, 2, 4, 1.0, 0.01, rng);
    const CsiState csi{CsiMode::Perfect, 0.0, draw.h};
    const double rs = split_secrecy(draw, csi, 1.0, 5.0);
    CHECK(rs >= 0.0);
  }
}
