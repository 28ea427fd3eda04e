#pragma once

#include <vector>

#include "bsf/graph.hpp"

namespace bsf {

/// Duals of the restricted master: theta for the tree-count row, eta per
/// cover row, zeta per weight row.
struct DualValues {
  double theta = 0.0;
  std::vector<double> eta;
  std::vector<double> zeta;
};

/// rho(T) = -theta + sum_{v in T} eta_v - w(T) * sum_{v in T} zeta_v.
inline double reduced_cost(const Tree& t, const DualValues& d) {
  double eta = 0.0, zeta = 0.0;
  for (Vertex v : t.vertices) {
    eta += d.eta[v];
    zeta += d.zeta[v];
  }
  return -d.theta + eta - static_cast<double>(t.weight) * zeta;
}

}  // namespace bsf
