#pragma once

#include <array>
#include <string>
#include <vector>

#include "isac/rng.hpp"
#include "isac/types.hpp"

namespace isac {

enum class ConstellationKind { Bpsk, Qpsk, Qam16, Qam64, Qam256, Qam1024 };

inline constexpr std::array<ConstellationKind, 6> kAllConstellations = {
    ConstellationKind::Bpsk,   ConstellationKind::Qpsk,
    ConstellationKind::Qam16,  ConstellationKind::Qam64,
    ConstellationKind::Qam256, ConstellationKind::Qam1024};

// Unit-average-power symbol alphabet with a fixed point ordering: QAM points
// run row-major over I then Q levels (each ascending), PSK points run with
// increasing angle. Fixed ordering keeps seeded draws reproducible.
struct Alphabet {
  ConstellationKind kind;
  std::vector<Complex> points;

  int order() const { return static_cast<int>(points.size()); }
};

const Alphabet& alphabet(ConstellationKind kind);

int constellation_order(ConstellationKind kind);

// N x M matrix of i.i.d. uniform draws from the alphabet, filled column-major.
SymbolMatrix draw_symbols(ConstellationKind kind, int n, int m,
                          RandomStream& rng);

// Config names: "bpsk", "qpsk", "qam16", "qam64", "qam256", "qam1024".
std::string to_string(ConstellationKind kind);
ConstellationKind constellation_from_string(const std::string& name);

}  // namespace isac
