#include "fjsec/channel.hpp"

namespace fjsec {

CMat sample_channel(int rows, int cols, Rng& rng, double entry_var) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("sample_channel: dimensions must be positive");
  if (entry_var < 0.0)
    throw std::invalid_argument("sample_channel: entry_var must be >= 0");
  CMat h(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) h(i, j) = rng.cgaussian(entry_var);
  return h;
}

ChannelDraw sample_draw(int n_t, int n_r, int n_e, double sigma_b2,
                        double sigma_e2, Rng& rng) {
  ChannelDraw d;
  d.h = sample_channel(n_t, n_r, rng);
  d.g = sample_channel(n_t, n_e, rng);
  d.sigma_b2 = sigma_b2;
  d.sigma_e2 = sigma_e2;
  return d;
}

std::pair<CMat, CMat> perturb(const CMat& h, double rho_e2, Rng& rng) {
  if (rho_e2 < 0.0) throw std::invalid_argument("perturb: rho_e2 must be >= 0");
  CMat dh = CMat::Zero(h.rows(), h.cols());
  if (rho_e2 > 0.0)
    dh = sample_channel(static_cast<int>(h.rows()), static_cast<int>(h.cols()),
                        rng, rho_e2);
  return {h + dh, dh};
}

CsiState make_csi(const ChannelDraw& draw, CsiMode mode, double rho_e2,
                  Rng& rng) {
  CsiState s;
  s.mode = mode;
  s.rho_e2 = (mode == CsiMode::Statistical) ? rho_e2 : 0.0;
  switch (mode) {
    case CsiMode::Perfect:
      s.h_hat = draw.h;
      break;
    case CsiMode::Statistical:
      s.h_hat = perturb(draw.h, rho_e2, rng).first;
      break;
    case CsiMode::Unknown:
      s.h_hat.resize(0, 0);
      break;
  }
  return s;
}

CVec transmit(const CMat& h, const CVec& x, double sigma2, Rng& rng) {
  if (x.size() != h.rows())
    throw std::invalid_argument("transmit: x length must equal antenna count");
  if (sigma2 < 0.0) throw std::invalid_argument("transmit: sigma2 must be >= 0");
  CVec y = h.adjoint() * x;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += rng.cgaussian(sigma2);
  return y;
}

}  // namespace fjsec
