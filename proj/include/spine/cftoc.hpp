#pragma once

#include <string>
#include <vector>

#include "spine/linearization.hpp"
#include "spine/qp.hpp"
#include "spine/spine_config.hpp"
#include "spine/types.hpp"

namespace spine {

// Block structure of the state vector, needed by the builders to address
// pose entries, z positions and per-vertebra blocks. Derived from a
// SpineConfig for the real models; toy systems can fill it by hand.
struct StateLayout {
  int workspace_dim = 1;   // position entries per vertebra
  int pose_size = 1;       // position + angle entries per vertebra
  int block_size = 2;      // full state entries per vertebra
  int num_vertebrae = 1;

  int state_size() const { return block_size * num_vertebrae; }
  int z_index(int vertebra) const { return vertebra * block_size + workspace_dim - 1; }
};

StateLayout make_layout(const SpineConfig& config);

// Configuration of the smoothing-constrained controller (no input
// reference). w1..w3 bound input moves, w4..w6 bound per-vertebra pose moves,
// w7 is the collision margin, w8 weighs the infinity-norm input-deviation
// cost, w9/w10 build the tracking weight Q, w11 the state-move weight S.
// Q and S diagonals are raised elementwise to the stage power.
struct SmoothingControllerConfig {
  int horizon = 10;
  double w1 = 0.02, w2 = 0.02, w3 = 0.02;     // m
  double w4 = 0.005, w5 = 0.005, w6 = 0.005;  // m or rad
  double w7 = 0.1;                            // m
  double w8 = 1.0;
  double w9 = 25.0, w10 = 10.0, w11 = 5.0;
  double u_min = 0.0, u_max = 0.3;            // m
  StateLayout layout;

  void validate() const;
};

// Configuration of the reference-input tracking controller on the planar
// single-vertebra model. Empty diagonals default to Q = P = I and R = 2 I.
struct ReferenceControllerConfig {
  int horizon = 4;
  Vec q_diag;  // state tracking weight
  Vec p_diag;  // terminal weight
  Vec r_diag;  // input tracking weight
  double u_min = 0.0, u_max = 0.3;  // m
  double vertebra_height = 0.15;    // h in the z >= h/2 bound
  StateLayout layout;

  void validate() const;
};

struct HorizonSolution {
  std::vector<Vec> inputs;  // u_{t|t} onward
  std::vector<Vec> states;  // xi_{t|t} .. xi_{t+N|t}, first entry is the measured state
  double objective = 0.0;
  QpStatus status = QpStatus::max_iterations;
  double u_min = 0.0, u_max = 0.0;
};

// A built CFTOC in condensed form: decision variables are the stacked
// inputs (plus epigraph slacks for the smoothing cost); predicted states are
// recovered affinely through state_map/state_offset, so the dynamics
// equalities hold by construction.
struct CftocProblem {
  QpProblem qp;
  int horizon = 0;
  int inputs_per_stage = 0;
  int input_stages = 0;
  int num_slacks = 0;
  Mat state_map;
  Vec state_offset;
  double objective_offset = 0.0;
  double u_min = 0.0, u_max = 0.0;
  bool trivially_infeasible = false;  // the fixed initial state already violates a bound
  std::string infeasible_reason;

  int num_vars() const { return inputs_per_stage * input_stages + num_slacks; }
  HorizonSolution to_horizon_solution(const QpSolution& sol) const;
};

// Smoothing CFTOC over inputs u_t .. u_{t+N} with the per-stage cost
//   (xi - xi_ref)' Q^k (xi - xi_ref) + (xi_k - xi_{k-1})' S^k (xi_k - xi_{k-1})
//   + w8 * || u_k - u_{k-1} ||_inf
// subject to the input box, input/pose smoothing bounds and the z-ordering
// collision constraints. xi_ref_window must hold N+1 states.
CftocProblem build_smoothing_cftoc(const AffineModel& model, const Vec& xi, const Vec& u_prev,
                                   const std::vector<Vec>& xi_ref_window,
                                   const SmoothingControllerConfig& config);

// Reference-tracking CFTOC over inputs u_t .. u_{t+N-1} with stage costs
// Q/R on state/input tracking error and terminal cost P, subject to the
// input box and z >= h/2. Windows hold N+1 states and N inputs.
CftocProblem build_reference_cftoc(const AffineModel& model, const Vec& xi,
                                   const std::vector<Vec>& xi_ref_window,
                                   const std::vector<Vec>& u_ref_window,
                                   const ReferenceControllerConfig& config);

// First input of the horizon, defensively clamped to the input box. Throws
// if the solution is not optimal.
Vec extract_first_input(const HorizonSolution& sol);

}  // namespace spine
