#include "spine/cftoc.hpp"

#include <cmath>
#include <stdexcept>

namespace spine {

namespace {

// Elementwise power of a diagonal; zero entries stay zero (0^0 included).
Vec diag_power(const Vec& base, int k) {
  Vec out(base.size());
  for (int i = 0; i < base.size(); ++i)
    out[i] = base[i] == 0.0 ? 0.0 : std::pow(base[i], k);
  return out;
}

void check_model(const AffineModel& model, const Vec& xi, int state_size) {
  if (model.a.rows() != state_size || model.a.cols() != state_size ||
      model.b.rows() != state_size || model.c.size() != state_size ||
      xi.size() != state_size)
    throw std::invalid_argument("CFTOC: model/state dimensions do not match the layout");
}

// Stage-by-stage prediction matrices: stacked states over k = 0..N as an
// affine function of the stacked inputs.
void build_prediction(const AffineModel& model, const Vec& xi, int horizon, int input_cols,
                      Mat& state_map, Vec& state_offset) {
  const int n = static_cast<int>(xi.size());
  const int m = static_cast<int>(model.b.cols());
  state_map = Mat::Zero(n * (horizon + 1), input_cols);
  state_offset = Vec::Zero(n * (horizon + 1));
  state_offset.head(n) = xi;
  for (int k = 0; k < horizon; ++k) {
    const auto prev_map = state_map.middleRows(k * n, n);
    auto next_map = state_map.middleRows((k + 1) * n, n);
    // Inputs beyond stage k have no effect yet; only multiply live columns.
    if (k > 0) next_map.leftCols(k * m) = model.a * prev_map.leftCols(k * m);
    next_map.middleCols(k * m, m) += model.b;
    state_offset.segment((k + 1) * n, n) =
        model.a * state_offset.segment(k * n, n) + model.c;
  }
}

struct CostAccumulator {
  Mat h;
  Vec f;
  double constant = 0.0;

  explicit CostAccumulator(int nz) : h(Mat::Zero(nz, nz)), f(Vec::Zero(nz)) {}

  // Adds e' W e with e = rows * z + shift, W = diag(w).
  void add_quadratic(const Eigen::Ref<const Mat>& rows, const Vec& shift, const Vec& w) {
    for (int i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      const auto row = rows.row(i);
      h.selfadjointView<Eigen::Lower>().rankUpdate(row.transpose(), w[i]);
      f += (w[i] * shift[i]) * row.transpose();
      constant += w[i] * shift[i] * shift[i];
    }
  }

  void finalize(QpProblem& qp) {
    h = h.selfadjointView<Eigen::Lower>();
    qp.h = 2.0 * h;  // objective convention is 0.5 z'Hz + f'z
    qp.f = 2.0 * f;
  }
};

struct RowBuilder {
  Mat a;
  Vec b;
  int used = 0;

  RowBuilder(int rows, int cols) : a(Mat::Zero(rows, cols)), b(Vec::Zero(rows)) {}

  // coeff' z <= bound
  auto next(double bound) {
    b[used] = bound;
    return a.row(used++);
  }

  void finish(QpProblem& qp) {
    if (used != a.rows()) throw std::logic_error("CFTOC: constraint row count mismatch");
    qp.a_ineq = std::move(a);
    qp.b_ineq = std::move(b);
  }
};

}  // namespace

StateLayout make_layout(const SpineConfig& config) {
  StateLayout l;
  l.workspace_dim = config.workspace_dim();
  l.pose_size = config.pose_size();
  l.block_size = config.state_block_size();
  l.num_vertebrae = config.num_moving_vertebrae;
  return l;
}

void SmoothingControllerConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("smoothing controller: horizon must be >= 1");
  if (!(u_min < u_max)) throw std::invalid_argument("smoothing controller: u_min < u_max required");
  if (!(w7 > 0)) throw std::invalid_argument("smoothing controller: collision margin w7 must be > 0");
  for (double w : {w1, w2, w3, w4, w5, w6, w8, w9, w10, w11})
    if (w < 0) throw std::invalid_argument("smoothing controller: weights must be >= 0");
}

void ReferenceControllerConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("reference controller: horizon must be >= 1");
  if (!(u_min < u_max)) throw std::invalid_argument("reference controller: u_min < u_max required");
  if (!(vertebra_height > 0)) throw std::invalid_argument("reference controller: h must be > 0");
  for (const Vec* d : {&q_diag, &p_diag, &r_diag})
    if (d->size() > 0 && d->minCoeff() < 0)
      throw std::invalid_argument("reference controller: weight diagonals must be >= 0");
}

CftocProblem build_smoothing_cftoc(const AffineModel& model, const Vec& xi, const Vec& u_prev,
                                   const std::vector<Vec>& xi_ref_window,
                                   const SmoothingControllerConfig& config) {
  config.validate();
  const StateLayout& layout = config.layout;
  const int n = layout.state_size();
  const int m = static_cast<int>(model.b.cols());
  const int horizon = config.horizon;
  check_model(model, xi, n);
  if (u_prev.size() != m)
    throw std::invalid_argument("CFTOC: previous input has wrong dimension");
  if (static_cast<int>(xi_ref_window.size()) < horizon + 1)
    throw std::invalid_argument("CFTOC: reference window shorter than N+1 states");
  for (const Vec& r : xi_ref_window)
    if (r.size() != n) throw std::invalid_argument("CFTOC: reference state dimension mismatch");

  CftocProblem out;
  out.horizon = horizon;
  out.inputs_per_stage = m;
  out.input_stages = horizon + 1;  // the smoothing cost and bounds reach u_{t+N}
  out.num_slacks = horizon + 1;
  out.u_min = config.u_min;
  out.u_max = config.u_max;

  const int num_u = m * out.input_stages;
  const int nz = num_u + out.num_slacks;
  const int slack0 = num_u;

  build_prediction(model, xi, horizon, nz, out.state_map, out.state_offset);

  // Diagonal templates over one full state: pose entries weighted, velocity
  // entries zero. Per-vertebra position/angle split for Q, flat pose for S.
  Vec q_base = Vec::Zero(n), s_base = Vec::Zero(n);
  for (int v = 0; v < layout.num_vertebrae; ++v) {
    const int base = v * layout.block_size;
    for (int i = 0; i < layout.workspace_dim; ++i) q_base[base + i] = config.w9;
    for (int i = layout.workspace_dim; i < layout.pose_size; ++i) q_base[base + i] = config.w10;
    for (int i = 0; i < layout.pose_size; ++i) s_base[base + i] = config.w11;
  }

  CostAccumulator cost(nz);
  // k = 0 tracking term is constant in the decision variables but still part
  // of the reported objective.
  {
    const Vec q0 = diag_power(q_base, 0);
    const Vec e0 = xi - xi_ref_window[0];
    for (int i = 0; i < n; ++i) cost.constant += q0[i] * e0[i] * e0[i];
  }
  for (int k = 1; k <= horizon; ++k) {
    const auto rows = out.state_map.middleRows(k * n, n);
    const Vec shift_q = out.state_offset.segment(k * n, n) - xi_ref_window[k];
    cost.add_quadratic(rows, shift_q, diag_power(q_base, k));

    const Mat diff_rows = rows - out.state_map.middleRows((k - 1) * n, n);
    const Vec shift_s =
        out.state_offset.segment(k * n, n) - out.state_offset.segment((k - 1) * n, n);
    cost.add_quadratic(diff_rows, shift_s, diag_power(s_base, k));
  }
  cost.finalize(out.qp);
  // w8 * sum_k s_k, linear in the epigraph slacks.
  for (int k = 0; k <= horizon; ++k) out.qp.f[slack0 + k] += config.w8;
  out.objective_offset = cost.constant;

  const int num_rows = 2 * num_u                         // input box
                       + 2 * m                           // |u_t - u_{t-1}| <= w1
                       + 2 * m * (horizon - 1)           // |u_{t+k} - u_t| <= w2
                       + 2 * m                           // |u_{t+N} - u_t| <= w3
                       + 2 * layout.pose_size * layout.num_vertebrae * horizon  // pose moves
                       + (layout.num_vertebrae - 1) * horizon  // collision ordering
                       + 2 * m * (horizon + 1);          // epigraph rows
  RowBuilder rows(num_rows, nz);

  auto u_col = [m](int stage, int coord) { return stage * m + coord; };

  // Input box.
  for (int k = 0; k <= horizon; ++k)
    for (int i = 0; i < m; ++i) {
      rows.next(config.u_max)[u_col(k, i)] = 1.0;
      rows.next(-config.u_min)[u_col(k, i)] = -1.0;
    }
  // First-move bound against the applied input.
  for (int i = 0; i < m; ++i) {
    rows.next(config.w1 + u_prev[i])[u_col(0, i)] = 1.0;
    rows.next(config.w1 - u_prev[i])[u_col(0, i)] = -1.0;
  }
  // Later stages stay close to u_t.
  for (int k = 1; k <= horizon; ++k) {
    const double bound = k == horizon ? config.w3 : config.w2;
    for (int i = 0; i < m; ++i) {
      auto row_hi = rows.next(bound);
      row_hi[u_col(k, i)] = 1.0;
      row_hi[u_col(0, i)] = -1.0;
      auto row_lo = rows.next(bound);
      row_lo[u_col(k, i)] = -1.0;
      row_lo[u_col(0, i)] = 1.0;
    }
  }
  // Pose smoothing between consecutive predicted states; velocities free.
  const double pose_bounds[3] = {config.w4, config.w5, config.w6};
  for (int k = 1; k <= horizon; ++k) {
    for (int v = 0; v < layout.num_vertebrae; ++v) {
      const double bound = pose_bounds[std::min(v, 2)];
      for (int i = 0; i < layout.pose_size; ++i) {
        const int idx = k * n + v * layout.block_size + i;
        const int prev = (k - 1) * n + v * layout.block_size + i;
        const Mat::RowXpr::PlainObject diff =
            out.state_map.row(idx) - out.state_map.row(prev);
        const double shift = out.state_offset[idx] - out.state_offset[prev];
        rows.next(bound - shift) = diff;
        rows.next(bound + shift) = -diff;
      }
    }
  }
  // Collision: z of vertebra v + w7 <= z of vertebra v+1 along the horizon.
  for (int k = 1; k <= horizon; ++k) {
    for (int v = 0; v + 1 < layout.num_vertebrae; ++v) {
      const int lo = k * n + layout.z_index(v);
      const int hi = k * n + layout.z_index(v + 1);
      const Mat::RowXpr::PlainObject diff = out.state_map.row(lo) - out.state_map.row(hi);
      const double shift = out.state_offset[lo] - out.state_offset[hi];
      rows.next(-config.w7 - shift) = diff;
    }
  }
  // Epigraph rows: +-(u_k - u_{k-1}) <= s_k, with u_{t-1} fixed.
  for (int k = 0; k <= horizon; ++k) {
    for (int i = 0; i < m; ++i) {
      auto hi = rows.next(k == 0 ? u_prev[i] : 0.0);
      hi[u_col(k, i)] = 1.0;
      if (k > 0) hi[u_col(k - 1, i)] = -1.0;
      hi[slack0 + k] = -1.0;
      auto lo = rows.next(k == 0 ? -u_prev[i] : 0.0);
      lo[u_col(k, i)] = -1.0;
      if (k > 0) lo[u_col(k - 1, i)] = 1.0;
      lo[slack0 + k] = -1.0;
    }
  }
  rows.finish(out.qp);
  out.qp.a_eq = Mat::Zero(0, nz);
  out.qp.b_eq = Vec::Zero(0);

  // The measured state is fixed; vertebra ordering at k = 0 must already hold.
  for (int v = 0; v + 1 < layout.num_vertebrae; ++v) {
    if (xi[layout.z_index(v)] + config.w7 > xi[layout.z_index(v + 1)]) {
      out.trivially_infeasible = true;
      out.infeasible_reason = "initial state violates the collision margin";
    }
  }
  return out;
}

CftocProblem build_reference_cftoc(const AffineModel& model, const Vec& xi,
                                   const std::vector<Vec>& xi_ref_window,
                                   const std::vector<Vec>& u_ref_window,
                                   const ReferenceControllerConfig& config) {
  config.validate();
  const StateLayout& layout = config.layout;
  const int n = layout.state_size();
  const int m = static_cast<int>(model.b.cols());
  const int horizon = config.horizon;
  check_model(model, xi, n);
  if (static_cast<int>(xi_ref_window.size()) < horizon + 1)
    throw std::invalid_argument("CFTOC: reference window shorter than N+1 states");
  if (static_cast<int>(u_ref_window.size()) < horizon)
    throw std::invalid_argument("CFTOC: input reference window shorter than N stages");

  const Vec q_diag = config.q_diag.size() ? config.q_diag : Vec::Ones(n);
  const Vec p_diag = config.p_diag.size() ? config.p_diag : Vec::Ones(n);
  const Vec r_diag = config.r_diag.size() ? config.r_diag : Vec(2.0 * Vec::Ones(m));
  if (q_diag.size() != n || p_diag.size() != n || r_diag.size() != m)
    throw std::invalid_argument("CFTOC: weight diagonal dimensions mismatch");

  CftocProblem out;
  out.horizon = horizon;
  out.inputs_per_stage = m;
  out.input_stages = horizon;  // u_t .. u_{t+N-1}
  out.num_slacks = 0;
  out.u_min = config.u_min;
  out.u_max = config.u_max;

  const int nz = m * horizon;
  build_prediction(model, xi, horizon, nz, out.state_map, out.state_offset);

  CostAccumulator cost(nz);
  {
    const Vec e0 = xi - xi_ref_window[0];
    for (int i = 0; i < n; ++i) cost.constant += q_diag[i] * e0[i] * e0[i];
  }
  for (int k = 1; k < horizon; ++k) {
    const auto state_rows = out.state_map.middleRows(k * n, n);
    const Vec shift = out.state_offset.segment(k * n, n) - xi_ref_window[k];
    cost.add_quadratic(state_rows, shift, q_diag);
  }
  {
    const auto terminal_rows = out.state_map.middleRows(horizon * n, n);
    const Vec shift = out.state_offset.segment(horizon * n, n) - xi_ref_window[horizon];
    cost.add_quadratic(terminal_rows, shift, p_diag);
  }
  for (int k = 0; k < horizon; ++k) {
    Mat input_rows = Mat::Zero(m, nz);
    input_rows.middleCols(k * m, m).setIdentity();
    cost.add_quadratic(input_rows, -u_ref_window[k], r_diag);
  }
  cost.finalize(out.qp);
  out.objective_offset = cost.constant;

  const int num_rows = 2 * nz + horizon;
  RowBuilder rows(num_rows, nz);
  for (int k = 0; k < horizon; ++k)
    for (int i = 0; i < m; ++i) {
      rows.next(config.u_max)[k * m + i] = 1.0;
      rows.next(-config.u_min)[k * m + i] = -1.0;
    }
  // z >= h/2 for the predicted states k = 1..N (single moving vertebra).
  const double floor = config.vertebra_height / 2.0;
  for (int k = 1; k <= horizon; ++k) {
    const int zi = k * n + layout.z_index(0);
    rows.next(out.state_offset[zi] - floor) = -out.state_map.row(zi);
  }
  rows.finish(out.qp);
  out.qp.a_eq = Mat::Zero(0, nz);
  out.qp.b_eq = Vec::Zero(0);

  if (xi[layout.z_index(0)] < floor) {
    out.trivially_infeasible = true;
    out.infeasible_reason = "initial state violates the z >= h/2 bound";
  }
  return out;
}

HorizonSolution CftocProblem::to_horizon_solution(const QpSolution& sol) const {
  HorizonSolution h;
  h.status = sol.status;
  h.u_min = u_min;
  h.u_max = u_max;
  h.objective = sol.objective + objective_offset;
  const int m = inputs_per_stage;
  h.inputs.reserve(input_stages);
  for (int k = 0; k < input_stages; ++k) h.inputs.push_back(sol.z.segment(k * m, m));
  const Vec stacked = state_map * sol.z + state_offset;
  const int n = static_cast<int>(state_offset.size()) / (horizon + 1);
  h.states.reserve(horizon + 1);
  for (int k = 0; k <= horizon; ++k) h.states.push_back(stacked.segment(k * n, n));
  return h;
}

Vec extract_first_input(const HorizonSolution& sol) {
  if (sol.status != QpStatus::optimal)
    throw std::runtime_error("extract_first_input: solution is not optimal");
  if (sol.inputs.empty()) throw std::runtime_error("extract_first_input: empty horizon");
  return sol.inputs.front().cwiseMax(sol.u_min).cwiseMin(sol.u_max);
}

}  // namespace spine
