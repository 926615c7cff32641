#pragma once

#include "biphoton/domain_types.hpp"
#include "biphoton/gating.hpp"

namespace biphoton::detail {

// Decay-weighted moments of the true delay over the coincidences that land
// in a gate, with p(tau) = exp(-tau/tau_X)/tau_X and P(gate | tau) the
// acceptance probability after jitter:
//   weight    = int p P dtau
//   coherent  = int p P v dtau
//   coherence = int p P v exp(i S tau / hbar) dtau
struct GateMoments {
  double weight = 0.0;
  double coherent = 0.0;
  Complex coherence{0.0, 0.0};

  GateMoments& operator+=(const GateMoments& other) {
    weight += other.weight;
    coherent += other.coherent;
    coherence += other.coherence;
    return *this;
  }
};

// Upper limit for true-delay integrals; the dropped tail carries 1e-12 of
// the decay mass.
double truncation_delay(const SourceModel& model);

GateMoments gate_moments(const GateWindow& gate, const SourceModel& model);
double gate_weight(const GateWindow& gate, const SourceModel& model);

}  // namespace biphoton::detail
