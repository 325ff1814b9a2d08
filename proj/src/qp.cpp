#include "spine/qp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace spine {

namespace {

constexpr double kStaticReg = 1e-11;

void validate_problem(const QpProblem& p) {
  const int n = p.num_vars();
  if (p.h.rows() != n || p.h.cols() != n)
    throw std::invalid_argument("QP: H must be n x n with n = size of f");
  if (p.a_ineq.rows() != p.b_ineq.size() || (p.num_ineq() > 0 && p.a_ineq.cols() != n))
    throw std::invalid_argument("QP: inequality system dimensions are inconsistent");
  if (p.a_eq.rows() != p.b_eq.size() || (p.num_eq() > 0 && p.a_eq.cols() != n))
    throw std::invalid_argument("QP: equality system dimensions are inconsistent");

  const double h_scale = n > 0 ? p.h.cwiseAbs().maxCoeff() : 0.0;
  if (n > 0 && (p.h - p.h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h_scale))
    throw std::invalid_argument("QP: H is not symmetric");

  // PSD check through a pivoted LDLT; small negative pivots from roundoff
  // are tolerated.
  if (n > 0) {
    Eigen::LDLT<Mat> ldlt(p.h);
    const double floor = -1e-9 * std::max(1.0, h_scale);
    if (ldlt.info() == Eigen::NumericalIssue || ldlt.vectorD().minCoeff() < floor)
      throw std::invalid_argument("QP: H is not positive semidefinite");
  }
}

struct KktResidual {
  double stationarity;
  double eq_feas;
  double ineq_feas;
  double complementarity;
  double max() const {
    return std::max(std::max(stationarity, eq_feas), std::max(ineq_feas, complementarity));
  }
};

KktResidual kkt_residual(const QpProblem& p, const Vec& z, const Vec& lambda, const Vec& nu,
                         const Vec& slack) {
  KktResidual r{0, 0, 0, 0};
  Vec grad = p.h * z + p.f;
  if (p.num_eq() > 0) grad += p.a_eq.transpose() * nu;
  if (p.num_ineq() > 0) grad += p.a_ineq.transpose() * lambda;
  r.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (p.num_eq() > 0) r.eq_feas = (p.a_eq * z - p.b_eq).cwiseAbs().maxCoeff();
  if (p.num_ineq() > 0) {
    r.ineq_feas = (p.a_ineq * z + slack - p.b_ineq).cwiseAbs().maxCoeff();
    r.complementarity = slack.cwiseProduct(lambda).cwiseAbs().maxCoeff();
  }
  return r;
}

// Largest alpha in (0, 1] with v + alpha * dv >= (1 - tau) * v, given v > 0.
double step_length(const Vec& v, const Vec& dv, double tau) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i)
    if (dv[i] < 0) alpha = std::min(alpha, -tau * v[i] / dv[i]);
  return alpha;
}

// Equality-constrained (or unconstrained) QP: one KKT solve.
QpSolution solve_equality_qp(const QpProblem& p, const QpSolverOptions& options) {
  const int n = p.num_vars();
  const int me = p.num_eq();
  Mat kkt = Mat::Zero(n + me, n + me);
  kkt.topLeftCorner(n, n) = p.h;
  kkt.topLeftCorner(n, n).diagonal().array() += kStaticReg;
  if (me > 0) {
    kkt.topRightCorner(n, me) = p.a_eq.transpose();
    kkt.bottomLeftCorner(me, n) = p.a_eq;
    kkt.bottomRightCorner(me, me).diagonal().array() -= kStaticReg;
  }
  Vec rhs(n + me);
  rhs.head(n) = -p.f;
  rhs.tail(me) = p.b_eq;

  Eigen::FullPivLU<Mat> lu(kkt);
  Vec sol = lu.solve(rhs);
  sol += lu.solve(rhs - kkt * sol);

  QpSolution out;
  out.z = sol.head(n);
  out.eq_duals = sol.tail(me);
  out.ineq_duals = Vec::Zero(0);
  out.iterations = 1;
  const auto res = kkt_residual(p, out.z, out.ineq_duals, out.eq_duals, Vec::Zero(0));
  out.kkt_residual = res.max();
  out.objective = p.objective(out.z);
  if (res.max() <= options.tol) {
    out.status = QpStatus::optimal;
  } else if (me > 0 && res.eq_feas > options.tol) {
    out.status = QpStatus::infeasible;  // inconsistent equality system
  } else {
    out.status = QpStatus::max_iterations;
  }
  return out;
}

}  // namespace

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

QpSolution solve(const QpProblem& p, const QpSolverOptions& options,
                 const std::optional<Vec>& initial_guess) {
  validate_problem(p);
  const int n = p.num_vars();
  const int mi = p.num_ineq();
  const int me = p.num_eq();

  if (initial_guess && initial_guess->size() != n)
    throw std::invalid_argument("QP: initial guess has wrong dimension");

  if (mi == 0) return solve_equality_qp(p, options);

  // Split inequality rows: rows with few nonzeros are accumulated into the
  // normal matrix entry by entry, the rest through one dense rank update.
  std::vector<std::vector<int>> sparse_support;
  std::vector<int> sparse_rows, dense_rows;
  for (int r = 0; r < mi; ++r) {
    std::vector<int> support;
    for (int j = 0; j < n; ++j)
      if (p.a_ineq(r, j) != 0.0) support.push_back(j);
    if (support.size() <= 8) {
      sparse_rows.push_back(r);
      sparse_support.push_back(std::move(support));
    } else {
      dense_rows.push_back(r);
    }
  }
  Mat a_dense(static_cast<int>(dense_rows.size()), n);
  for (size_t k = 0; k < dense_rows.size(); ++k) a_dense.row(k) = p.a_ineq.row(dense_rows[k]);
  const Mat a_ineq_t = p.a_ineq.transpose();

  Vec z = initial_guess ? *initial_guess : Vec::Zero(n);
  Vec slack_raw = p.b_ineq - p.a_ineq * z;
  const double init_floor = 0.1 * std::max(1.0, p.b_ineq.cwiseAbs().maxCoeff());
  Vec s = slack_raw.cwiseMax(init_floor);
  Vec lambda = Vec::Constant(mi, 0.1);
  Vec nu = Vec::Zero(me);

  const double reg = kStaticReg * std::max(1.0, p.h.cwiseAbs().maxCoeff());

  QpSolution out;
  int stall_count = 0;

  Mat kkt(n + me, n + me);
  Eigen::PartialPivLU<Mat> lu;

  auto saddle_solve = [&](const Vec& rhs) {
    Vec sol = lu.solve(rhs);
    sol += lu.solve(rhs - kkt * sol);  // one refinement pass
    return sol;
  };

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const Vec r_d = p.h * z + p.f +
                    (me > 0 ? Vec(p.a_eq.transpose() * nu) : Vec::Zero(n)) +
                    a_ineq_t * lambda;
    const Vec r_e = me > 0 ? Vec(p.a_eq * z - p.b_eq) : Vec::Zero(0);
    const Vec r_i = p.a_ineq * z + s - p.b_ineq;
    const double mu = s.dot(lambda) / mi;

    KktResidual res{r_d.cwiseAbs().maxCoeff(),
                    me > 0 ? r_e.cwiseAbs().maxCoeff() : 0.0,
                    r_i.cwiseAbs().maxCoeff(),
                    s.cwiseProduct(lambda).cwiseAbs().maxCoeff()};
    if (res.max() <= options.tol) {
      out.status = QpStatus::optimal;
      break;
    }

    // Farkas-style certificate of primal infeasibility from diverging duals:
    // y >= 0, A_ineq' y + A_eq' w ~ 0 and b_ineq' y + b_eq' w < 0.
    const double dual_scale =
        std::max(lambda.cwiseAbs().maxCoeff(), me > 0 ? nu.cwiseAbs().maxCoeff() : 0.0);
    if (dual_scale > 1e4) {
      const Vec yn = lambda / dual_scale;
      const Vec wn = me > 0 ? Vec(nu / dual_scale) : Vec::Zero(0);
      Vec cert = a_ineq_t * yn;
      if (me > 0) cert += p.a_eq.transpose() * wn;
      const double gap = p.b_ineq.dot(yn) + (me > 0 ? p.b_eq.dot(wn) : 0.0);
      if (cert.cwiseAbs().maxCoeff() <= 1e-8 && gap < -1e-10) {
        out.status = QpStatus::infeasible;
        break;
      }
    }

    // Normal matrix K = H + A_ineq' diag(lambda/s) A_ineq.
    const Vec d = lambda.cwiseQuotient(s);
    Mat k_mat = p.h;
    k_mat.diagonal().array() += reg;
    for (size_t sr = 0; sr < sparse_rows.size(); ++sr) {
      const int r = sparse_rows[sr];
      const auto& support = sparse_support[sr];
      for (size_t a = 0; a < support.size(); ++a)
        for (size_t b = 0; b <= a; ++b)
          k_mat(support[a], support[b]) +=
              d[r] * p.a_ineq(r, support[a]) * p.a_ineq(r, support[b]);
    }
    if (!dense_rows.empty()) {
      Vec d_dense(static_cast<int>(dense_rows.size()));
      for (size_t k = 0; k < dense_rows.size(); ++k) d_dense[k] = d[dense_rows[k]];
      const Mat w = d_dense.cwiseSqrt().asDiagonal() * a_dense;
      k_mat.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
    }
    k_mat = k_mat.selfadjointView<Eigen::Lower>();

    kkt.topLeftCorner(n, n) = k_mat;
    if (me > 0) {
      kkt.topRightCorner(n, me) = p.a_eq.transpose();
      kkt.bottomLeftCorner(me, n) = p.a_eq;
      kkt.bottomRightCorner(me, me) = -reg * Mat::Identity(me, me);
    }
    lu.compute(kkt);

    auto newton_direction = [&](const Vec& rc) {
      Vec rhs(n + me);
      rhs.head(n) = -r_d + a_ineq_t * (rc.cwiseQuotient(s) - d.cwiseProduct(r_i));
      if (me > 0) rhs.tail(me) = -r_e;
      const Vec sol = saddle_solve(rhs);
      struct Dir {
        Vec dz, dnu, ds, dlambda;
      } dir;
      dir.dz = sol.head(n);
      dir.dnu = sol.tail(me);
      dir.ds = -r_i - p.a_ineq * dir.dz;
      dir.dlambda = -(rc + lambda.cwiseProduct(dir.ds)).cwiseQuotient(s);
      return dir;
    };

    // Predictor.
    const Vec rc_aff = s.cwiseProduct(lambda);
    const auto aff = newton_direction(rc_aff);
    const double alpha_p_aff = step_length(s, aff.ds, 1.0);
    const double alpha_d_aff = step_length(lambda, aff.dlambda, 1.0);
    const double mu_aff = (s + alpha_p_aff * aff.ds).dot(lambda + alpha_d_aff * aff.dlambda) / mi;
    double sigma = mu > 0 ? std::pow(mu_aff / mu, 3) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    const Vec rc = s.cwiseProduct(lambda) + aff.ds.cwiseProduct(aff.dlambda) -
                   Vec::Constant(mi, sigma * mu);
    const auto dir = newton_direction(rc);

    const double tau = std::max(0.995, 1.0 - 10.0 * mu);
    const double alpha_p = step_length(s, dir.ds, tau);
    const double alpha_d = step_length(lambda, dir.dlambda, tau);

    z += alpha_p * dir.dz;
    s += alpha_p * dir.ds;
    lambda += alpha_d * dir.dlambda;
    if (me > 0) nu += alpha_d * dir.dnu;

    if (std::min(alpha_p, alpha_d) < 1e-10) {
      if (++stall_count >= 3) break;
    } else {
      stall_count = 0;
    }
  }

  out.z = z;
  out.ineq_duals = lambda;
  out.eq_duals = nu;
  out.iterations = iter;
  out.kkt_residual = kkt_residual(p, z, lambda, nu, s).max();
  out.objective = p.objective(z);
  if (out.status != QpStatus::optimal && out.status != QpStatus::infeasible)
    out.status = out.kkt_residual <= options.tol ? QpStatus::optimal : QpStatus::max_iterations;
  return out;
}

namespace {

void dump_matrix(std::ostream& out, const char* name, const Mat& m) {
  out << name << " " << m.rows() << " " << m.cols() << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << "\n";
  }
}

Mat load_matrix(std::istream& in, const char* name) {
  std::string tag;
  int rows, cols;
  if (!(in >> tag >> rows >> cols) || tag != name)
    throw std::runtime_error(std::string("QP load: expected matrix '") + name + "'");
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (!(in >> m(i, j))) throw std::runtime_error("QP load: truncated matrix data");
  return m;
}

}  // namespace

void dump_problem(const QpProblem& p, std::ostream& out) {
  out.precision(17);
  out << "qp_problem 1\n";
  dump_matrix(out, "H", p.h);
  dump_matrix(out, "f", p.f);
  dump_matrix(out, "A_ineq", p.a_ineq);
  dump_matrix(out, "b_ineq", p.b_ineq);
  dump_matrix(out, "A_eq", p.a_eq);
  dump_matrix(out, "b_eq", p.b_eq);
}

QpProblem load_problem(std::istream& in) {
  std::string tag;
  int version;
  if (!(in >> tag >> version) || tag != "qp_problem")
    throw std::runtime_error("QP load: not a qp_problem dump");
  QpProblem p;
  p.h = load_matrix(in, "H");
  p.f = load_matrix(in, "f");
  p.a_ineq = load_matrix(in, "A_ineq");
  p.b_ineq = load_matrix(in, "b_ineq");
  p.a_eq = load_matrix(in, "A_eq");
  p.b_eq = load_matrix(in, "b_eq");
  return p;
}

}  // namespace spine
