#pragma once

#include <array>
#include <iosfwd>
#include <random>
#include <vector>

#include "kcpath/diagram.hpp"

namespace kcpath {

// Portable uniform double in [0,1) from a mersenne stream; experiments
// replay bit-exactly for a fixed seed regardless of libstdc++ details.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// A diagram plus branch probabilities: a distribution over the diagram's
// models. theta[id] = {P(hi), P(lo)} for decision node id; a branch whose
// sub is False has probability 0, the feasible branches split evenly.
struct Psdd {
  Diagram diagram;
  std::vector<std::array<double, 2>> theta;
  double top_theta = 0.5;
};

// Throws std::invalid_argument if the diagram is False (no distribution
// over an empty model set exists).
Psdd uniform_parameterize(const Diagram& dd);

// Top-down branch sampling; positive literals collected along the walk
// are the sampled path's edges.
SimplePath sample_path(const Psdd& p, const Graph& g, int s, int d,
                       std::mt19937_64& rng);

// Probability mass of the assignments consistent with a set of positive
// edge literals (one bottom-up weighted pass).
double evidence_probability(const Psdd& p, const std::vector<int>& evidence);

// Exact Pr(query=1 | evidence) via two weighted passes. Throws
// std::invalid_argument when Pr(evidence) = 0.
double conditional_probability(const Psdd& p, int query,
                               const std::vector<int>& evidence);

// Probability of one full model (all positive vars listed).
double model_probability(const Psdd& p, const std::vector<int>& positive);

// Serialization: the diagram format plus one "THETA id p_hi p_lo" line
// per decision node and a "TOPTHETA p" line.
void write_psdd(const Psdd& p, std::ostream& os);
Psdd read_psdd(DiagramManager& m, std::istream& is);

}  // namespace kcpath
