#pragma once

#include <stdexcept>
#include <vector>

namespace sphflow {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lagrangian shell discretization of a radially symmetric flow on an annulus.
// Nodes carry radius and velocity; cells carry a constant mass and the
// density implied by the enclosed shell volume (cell_rho = cell_mass / V is
// a maintained invariant, refreshed by density_from_geometry()).
struct RadialState {
  double time = 0.0;
  int dim = 2;
  std::vector<double> node_r, node_u;        // K + 1 entries
  std::vector<double> cell_mass, cell_rho;   // K entries

  int cells() const { return static_cast<int>(cell_mass.size()); }
  double inner_radius() const { return node_r.front(); }
  double outer_radius() const { return node_r.back(); }

  static double shell_volume(double r0, double r1, int dim);
  double cell_volume(int j) const;
  double cell_center(int j) const {
    return 0.5 * (node_r[j] + node_r[j + 1]);
  }
  double total_mass() const;

  void density_from_geometry();
  // Structural checks: sizes, strictly increasing radii, positive masses and
  // densities, the density/volume invariant.  Throws SolverError.
  void require_valid() const;
};

}  // namespace sphflow
