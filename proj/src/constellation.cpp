#include "isac/constellation.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace isac {

namespace {

// Square QAM: per-axis odd levels +-1, +-3, ..., +-(L-1) scaled so the mean
// symbol power is exactly 1 (scale 1/sqrt(2(L^2-1)/3)).
Alphabet make_square_qam(ConstellationKind kind, int order) {
  const int levels = static_cast<int>(std::lround(std::sqrt(order)));
  const double scale =
      1.0 / std::sqrt(2.0 * (static_cast<double>(levels) * levels - 1) / 3.0);
  Alphabet a{kind, {}};
  a.points.reserve(order);
  for (int i = 0; i < levels; ++i) {
    const double re = scale * (2 * i - (levels - 1));
    for (int q = 0; q < levels; ++q) {
      const double im = scale * (2 * q - (levels - 1));
      a.points.emplace_back(re, im);
    }
  }
  return a;
}

Alphabet build(ConstellationKind kind) {
  switch (kind) {
    case ConstellationKind::Bpsk:
      return Alphabet{kind, {Complex{1.0, 0.0}, Complex{-1.0, 0.0}}};
    case ConstellationKind::Qpsk: {
      const double h = std::numbers::sqrt2 / 2.0;
      return Alphabet{kind,
                      {Complex{h, h}, Complex{-h, h}, Complex{-h, -h},
                       Complex{h, -h}}};
    }
    case ConstellationKind::Qam16:
      return make_square_qam(kind, 16);
    case ConstellationKind::Qam64:
      return make_square_qam(kind, 64);
    case ConstellationKind::Qam256:
      return make_square_qam(kind, 256);
    case ConstellationKind::Qam1024:
      return make_square_qam(kind, 1024);
  }
  throw std::invalid_argument("unknown constellation kind");
}

}  // namespace

const Alphabet& alphabet(ConstellationKind kind) {
  static const std::array<Alphabet, 6> tables = {
      build(ConstellationKind::Bpsk),   build(ConstellationKind::Qpsk),
      build(ConstellationKind::Qam16),  build(ConstellationKind::Qam64),
      build(ConstellationKind::Qam256), build(ConstellationKind::Qam1024)};
  return tables[static_cast<int>(kind)];
}

int constellation_order(ConstellationKind kind) {
  return alphabet(kind).order();
}

SymbolMatrix draw_symbols(ConstellationKind kind, int n, int m,
                          RandomStream& rng) {
  if (n < 1 || m < 1) {
    throw std::invalid_argument("draw_symbols: dimensions must be >= 1");
  }
  const Alphabet& a = alphabet(kind);
  const auto order = static_cast<std::uint64_t>(a.order());
  SymbolMatrix h(n, m);
  for (int col = 0; col < m; ++col) {
    for (int row = 0; row < n; ++row) {
      h(row, col) = a.points[rng.index_pow2(order)];
    }
  }
  return h;
}

std::string to_string(ConstellationKind kind) {
  switch (kind) {
    case ConstellationKind::Bpsk:
      return "bpsk";
    case ConstellationKind::Qpsk:
      return "qpsk";
    case ConstellationKind::Qam16:
      return "qam16";
    case ConstellationKind::Qam64:
      return "qam64";
    case ConstellationKind::Qam256:
      return "qam256";
    case ConstellationKind::Qam1024:
      return "qam1024";
  }
  throw std::invalid_argument("unknown constellation kind");
}

ConstellationKind constellation_from_string(const std::string& name) {
  static const std::map<std::string, ConstellationKind> names = {
      {"bpsk", ConstellationKind::Bpsk},     {"qpsk", ConstellationKind::Qpsk},
      {"qam16", ConstellationKind::Qam16},   {"qam64", ConstellationKind::Qam64},
      {"qam256", ConstellationKind::Qam256}, {"qam1024", ConstellationKind::Qam1024}};
  const auto it = names.find(name);
  if (it == names.end()) {
    throw std::invalid_argument("unknown constellation name: " + name);
  }
  return it->second;
}

}  // namespace isac
