#pragma once

#include <utility>
#include <vector>

#include "spine/config_text.hpp"
#include "spine/types.hpp"

namespace spine {

// Geometric and physical description of the cable-driven spine.
//
// Bodies are indexed 0..B where 0 is the base vertebra, fixed at the origin
// pose, and 1..B are the moving vertebrae stacked above it with spacing
// `vertebra_height` at the home pose. Consecutive bodies form a "pair"
// connected by cables; `cable_routing` lists (lower-node, upper-node) index
// pairs into `node_offsets`, and the same routing repeats for every pair.
//
// Every vertebra carries the same attachment nodes, given in its body frame.
// The defaults use a tetrahedron-style layout: two "up" tips and two "down"
// tips, so that a lower vertebra's up tips sit above the upper vertebra's
// down tips and the saddle cables can carry weight in pure tension.
struct SpineConfig {
  Dimension dimension = Dimension::planar2d;
  int num_moving_vertebrae = 1;
  double vertebra_mass = 0.5;     // kg
  Vec vertebra_inertia;           // kg m^2; scalar (2-D) or principal diagonal (3-D)
  double vertebra_height = 0.15;  // m, home-pose spacing between vertebra centers
  std::vector<Vec> node_offsets;  // body-frame attachment points, m
  std::vector<std::pair<int, int>> cable_routing;  // per pair: (lower node, upper node)
  double cable_stiffness = 500.0;  // N/m
  double cable_damping = 10.0;     // N s/m
  double gravity = 9.81;           // m/s^2
  double dt = 0.001;               // s

  int workspace_dim() const { return dimension == Dimension::planar2d ? 2 : 3; }
  int pose_size() const { return dimension == Dimension::planar2d ? 3 : 6; }
  int state_block_size() const { return 2 * pose_size(); }
  int state_size() const { return state_block_size() * num_moving_vertebrae; }
  int cables_per_pair() const { return static_cast<int>(cable_routing.size()); }
  int num_cables() const { return cables_per_pair() * num_moving_vertebrae; }
  int input_size() const { return num_cables(); }

  // 0-based index of vertebra v's z position within the full state vector.
  int z_index(int vertebra) const {
    return vertebra * state_block_size() + (dimension == Dimension::planar2d ? 1 : 2);
  }

  void validate() const;  // throws ConfigError on a broken invariant
};

// Defaults matching the two controller scenarios: a planar single-vertebra
// spine and a spatial three-vertebra spine.
SpineConfig planar_default();
SpineConfig spatial_default();

// Structured-text serialization (see docs/config_format.md). `read_spine_section`
// consumes a [spine] section; missing keys fall back to the dimension default.
SpineConfig read_spine_section(const ConfigDoc& doc);
std::string write_spine_section(const SpineConfig& config);

}  // namespace spine
