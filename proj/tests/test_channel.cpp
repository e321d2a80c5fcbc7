#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "fjsec/channel.hpp"
#include "fjsec/conventional_fj.hpp"

using namespace fjsec;

TEST_CASE("channel entries have unit power and zero pseudo-variance") {
  Rng rng(101);
  const CMat h = sample_channel(1000, 1000, rng);
  const double n = static_cast<double>(h.size());
  const double mean_power = h.squaredNorm() / n;
  CHECK(mean_power == doctest::Approx(1.0).epsilon(0.01));
  // circular symmetry: E[h^2] ~ 0 (not just E[|h|^2])
  const cdouble pseudo = h.array().square().sum() / n;
  CHECK(std::abs(pseudo) <= 0.01);
  const cdouble mean = h.sum() / n;
  CHECK(std::abs(mean) <= 0.01);
}

TEST_CASE("channel phases are uniform (KS test)") {
  Rng rng(102);
  const int n = 100000;
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) {
    const cdouble h = rng.cgaussian(1.0);
    u[i] = (std::arg(h) + M_PI) / (2.0 * M_PI);
  }
  std::sort(u.begin(), u.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    d = std::max(d, std::abs(u[i] - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - u[i]));
  }
  // 95% critical value 1.358 / sqrt(n)
  CHECK(d <= 1.358 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sample_channel is reproducible bit for bit") {
  Rng a = Rng::stream(55, StreamKind::Channel, 3);
  Rng b = Rng::stream(55, StreamKind::Channel, 3);
  const CMat ha = sample_channel(4, 2, a);
  const CMat hb = sample_channel(4, 2, b);
  CHECK((ha - hb).norm() == 0.0);
}

TEST_CASE("perturb with zero error variance is exact") {
  Rng rng(103);
  const CMat h = sample_channel(4, 2, rng);
  const auto [h_hat, dh] = perturb(h, 0.0, rng);
  CHECK((h_hat - h).norm() == 0.0);
  CHECK(dh.norm() == 0.0);
}

TEST_CASE("perturb error variance matches rho_e2") {
  Rng rng(104);
  const double rho_e2 = 0.01;
  double acc = 0.0;
  const int reps = 50;
  const int rows = 50, cols = 40;
  for (int r = 0; r < reps; ++r) {
    const CMat h = CMat::Zero(rows, cols);
    const auto [h_hat, dh] = perturb(h, rho_e2, rng);
    acc += dh.squaredNorm();
  }
  const double per_entry = acc / (static_cast<double>(reps) * rows * cols);
  CHECK(per_entry == doctest::Approx(rho_e2).epsilon(0.05));
  // E||dH||_F^2 = rows * cols * rho_e2
  CHECK(acc / reps ==
        doctest::Approx(rows * cols * rho_e2).epsilon(0.02));
}

TEST_CASE("transmit without noise applies the adjoint channel") {
  Rng rng(105);
  const CMat h = CMat::Identity(3, 3);
  CVec x(3);
  x << cdouble(1, 1), cdouble(-2, 0), cdouble(0, 3);
  const CVec y = transmit(h, x, 0.0, rng);
  CHECK((y - x).norm() == 0.0);
}

TEST_CASE("transmit noise variance is sigma2 per complex dimension") {
  Rng rng(106);
  const CMat h = CMat::Zero(2, 2);
  const double sigma2 = 0.25;
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    acc += transmit(h, CVec::Zero(2), sigma2, rng).squaredNorm();
  CHECK(acc / (2.0 * n) == doctest::Approx(sigma2).epsilon(0.03));
}

TEST_CASE("jamming in the nullspace vanishes at the receiver") {
  Rng rng(107);
  const CMat h = sample_channel(4, 2, rng);
  const FjDesign design = design_fj(h, 1.0);
  REQUIRE(design.n_fj == 2);
  const CVec w = sample_fj(design, rng);
  const CVec y = transmit(h, w, 0.0, rng);
  CHECK(y.norm() <= 1e-10 * w.norm());
}

TEST_CASE("make_csi modes") {
  Rng rng(108);
  const ChannelDraw d = sample_draw(4, 2, 3, 1.0, 1.0, rng);
  const CsiState perfect = make_csi(d, CsiMode::Perfect, 0.5, rng);
  CHECK((perfect.h_hat - d.h).norm() == 0.0);
  CHECK(perfect.rho_e2 == 0.0);
  const CsiState stat = make_csi(d, CsiMode::Statistical, 0.5, rng);
  CHECK(stat.h_hat.rows() == d.h.rows());
  CHECK((stat.h_hat - d.h).norm() > 0.0);
  const CsiState unknown = make_csi(d, CsiMode::Unknown, 0.5, rng);
  CHECK(unknown.h_hat.size() == 0);
}

TEST_CASE("argument validation") {
  Rng rng(109);
  CHECK_THROWS_AS(sample_channel(0, 2, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_channel(2, 2, rng, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(perturb(CMat::Zero(2, 2), -0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(transmit(CMat::Zero(2, 2), CVec::Zero(3), 1.0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(transmit(CMat::Zero(2, 2), CVec::Zero(2), -1.0, rng),
                  std::invalid_argument);
}
