#include "isac/rdmap.hpp"

#include <cmath>
#include <stdexcept>

#include "isac/waveform.hpp"

namespace isac {

void CfarConfig::validate() const {
  if (!(pfa > 0.0 && pfa < 1.0)) {
    throw std::invalid_argument("cfar: pfa must lie in (0, 1)");
  }
  if (train < 1) throw std::invalid_argument("cfar: train must be >= 1");
  if (guard < 0) throw std::invalid_argument("cfar: guard must be >= 0");
}

RangeDopplerMap matched_rd_map(const ReceivedFrame& R, const SymbolMatrix& H,
                               const FrameConfig& cfg,
                               const DelayDopplerGrid& grid) {
  const Eigen::MatrixXcd k = signature_correlations(R, H, cfg, grid);
  const double h2 = H.squaredNorm();
  RangeDopplerMap map;
  map.values = k.cwiseAbs2() / h2;
  map.grid = grid;
  return map;
}

double cfar_threshold_factor(double pfa, int train_total) {
  if (train_total < 1) {
    throw std::invalid_argument("cfar_threshold_factor: train_total must be >= 1");
  }
  if (!(pfa > 0.0 && pfa <= 1.0)) {
    throw std::invalid_argument("cfar_threshold_factor: pfa must lie in (0, 1]");
  }
  const double t = static_cast<double>(train_total);
  return t * (std::pow(pfa, -1.0 / t) - 1.0);
}

namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

std::vector<Detection> ca_cfar(const RangeDopplerMap& map,
                               const CfarConfig& cfar) {
  cfar.validate();
  const Eigen::MatrixXd& v = map.values;
  const int nd = static_cast<int>(v.rows());
  const int np = static_cast<int>(v.cols());
  const int reach = cfar.train + cfar.guard;
  const bool one_dim = (np == 1);

  if (2 * reach + 1 > nd || (!one_dim && 2 * reach + 1 > np)) {
    throw std::invalid_argument("ca_cfar: map too small for the CFAR window");
  }

  const int train_total = one_dim ? 2 * cfar.train : 4 * cfar.train;
  const double factor = cfar_threshold_factor(cfar.pfa, train_total);

  std::vector<Detection> out;
  for (int l = 0; l < nd; ++l) {
    for (int p = 0; p < np; ++p) {
      double sum = 0.0;
      for (int off = cfar.guard + 1; off <= reach; ++off) {
        sum += v(wrap(l - off, nd), p) + v(wrap(l + off, nd), p);
        if (!one_dim) {
          sum += v(l, wrap(p - off, np)) + v(l, wrap(p + off, np));
        }
      }
      const double mean = sum / train_total;
      if (v(l, p) > factor * mean) {
        out.push_back(Detection{l, p, v(l, p), std::nullopt});
      }
    }
  }
  return out;
}

std::vector<Detection> detect_fft_cfar(const ReceivedFrame& R,
                                       const SymbolMatrix& H,
                                       const FrameConfig& cfg,
                                       const DelayDopplerGrid& grid,
                                       const CfarConfig& cfar) {
  return ca_cfar(matched_rd_map(R, H, cfg, grid), cfar);
}

}  // namespace isac
