#include "vppm/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vppm/errors.hpp"

namespace vppm {

namespace {

constexpr double kTieEps = 1e-9;  // regularization on zero diagonal entries

struct SparseRow {
  std::vector<int> idx;
  std::vector<double> val;
};

std::vector<SparseRow> to_sparse_rows(const Eigen::MatrixXd& A) {
  std::vector<SparseRow> rows(static_cast<size_t>(A.rows()));
  for (int k = 0; k < A.rows(); ++k) {
    for (int i = 0; i < A.cols(); ++i) {
      const double v = A(k, i);
      if (v != 0.0) {
        rows[k].idx.push_back(i);
        rows[k].val.push_back(v);
      }
    }
  }
  return rows;
}

double row_dot(const SparseRow& r, const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (size_t k = 0; k < r.idx.size(); ++k) acc += r.val[k] * x[r.idx[k]];
  return acc;
}

void add_scaled_row(Eigen::VectorXd& out, const SparseRow& r, double a) {
  for (size_t k = 0; k < r.idx.size(); ++k) out[r.idx[k]] += a * r.val[k];
}

struct IpmProblem {
  int n = 0, me = 0, mi = 0;
  Eigen::MatrixXd Q;    // regularized
  Eigen::VectorXd q;
  Eigen::MatrixXd E;    // dense equalities (me x n)
  Eigen::VectorXd d;
  std::vector<SparseRow> arows;  // inequalities
  Eigen::VectorXd b;
  std::vector<int> lidx, uidx;   // variables with finite lb / ub
  Eigen::VectorXd lb, ub;        // full length, +-inf where absent
};

struct IpmState {
  Eigen::VectorXd x, y, z, s, wl, gl, wu, gu;
};

struct IpmOutcome {
  bool converged = false;
  bool stalled = false;
  int iterations = 0;
  IpmState st;
};

struct TrueResiduals {
  double stat = 0.0, prim = 0.0, comp = 0.0;
};

TrueResiduals true_residuals(const IpmProblem& p, const Eigen::MatrixXd& Qorig,
                             const IpmState& st) {
  TrueResiduals r;
  Eigen::VectorXd g = Qorig * st.x + p.q;
  if (p.me > 0) g.noalias() += p.E.transpose() * st.y;
  for (int k = 0; k < p.mi; ++k) add_scaled_row(g, p.arows[k], st.z[k]);
  for (size_t k = 0; k < p.lidx.size(); ++k) g[p.lidx[k]] -= st.wl[k];
  for (size_t k = 0; k < p.uidx.size(); ++k) g[p.uidx[k]] += st.wu[k];
  r.stat = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;

  if (p.me > 0)
    r.prim = std::max(r.prim, (p.E * st.x - p.d).cwiseAbs().maxCoeff());
  for (int k = 0; k < p.mi; ++k) {
    const double slack = p.b[k] - row_dot(p.arows[k], st.x);
    r.prim = std::max(r.prim, -slack);
    r.comp = std::max(r.comp, std::abs(st.z[k] * slack));
  }
  for (size_t k = 0; k < p.lidx.size(); ++k) {
    const double slack = st.x[p.lidx[k]] - p.lb[p.lidx[k]];
    r.prim = std::max(r.prim, -slack);
    r.comp = std::max(r.comp, std::abs(st.wl[k] * slack));
  }
  for (size_t k = 0; k < p.uidx.size(); ++k) {
    const double slack = p.ub[p.uidx[k]] - st.x[p.uidx[k]];
    r.prim = std::max(r.prim, -slack);
    r.comp = std::max(r.comp, std::abs(st.wu[k] * slack));
  }
  return r;
}

// Mehrotra predictor-corrector with equalities handled by a Schur
// complement on the condensed SPD system.
IpmOutcome ipm_solve(const IpmProblem& p, const Eigen::MatrixXd& Qorig,
                     double feas_tol, double comp_tol, int max_iter,
                     double init_scale = 1.0) {
  const int n = p.n, me = p.me, mi = p.mi;
  const int nl = static_cast<int>(p.lidx.size());
  const int nu = static_cast<int>(p.uidx.size());
  const int mtot = mi + nl + nu;

  IpmState st;
  st.x.resize(n);
  for (int i = 0; i < n; ++i) {
    const bool fl = std::isfinite(p.lb[i]), fu = std::isfinite(p.ub[i]);
    if (fl && fu)
      st.x[i] = 0.5 * (p.lb[i] + p.ub[i]);
    else if (fl)
      st.x[i] = p.lb[i] + 1.0;
    else if (fu)
      st.x[i] = p.ub[i] - 1.0;
    else
      st.x[i] = 0.0;
  }
  st.y = Eigen::VectorXd::Zero(me);
  st.s.resize(mi);
  st.z = Eigen::VectorXd::Constant(mi, init_scale);
  for (int k = 0; k < mi; ++k)
    st.s[k] = std::max(init_scale, p.b[k] - row_dot(p.arows[k], st.x));
  st.gl.resize(nl);
  st.wl = Eigen::VectorXd::Constant(nl, init_scale);
  for (int k = 0; k < nl; ++k)
    st.gl[k] = std::max(init_scale, st.x[p.lidx[k]] - p.lb[p.lidx[k]]);
  st.gu.resize(nu);
  st.wu = Eigen::VectorXd::Constant(nu, init_scale);
  for (int k = 0; k < nu; ++k)
    st.gu[k] = std::max(init_scale, p.ub[p.uidx[k]] - st.x[p.uidx[k]]);

  IpmOutcome out;
  Eigen::MatrixXd M(n, n);
  Eigen::MatrixXd Et;
  if (me > 0) Et = p.E.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::LLT<Eigen::MatrixXd> slt;
  Eigen::MatrixXd MinvEt;

  double best_score = std::numeric_limits<double>::infinity();
  int since_improve = 0;
  IpmState best_st;
  double best_abs = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter;
    const TrueResiduals tr = true_residuals(p, Qorig, st);
    const double score = tr.stat + tr.prim + tr.comp;
    if (score < best_abs) {
      best_abs = score;
      best_st = st;
    }
    if (tr.stat <= 0.5 * feas_tol && tr.prim <= 0.5 * feas_tol &&
        tr.comp <= 0.5 * comp_tol) {
      out.converged = true;
      break;
    }
    if (score < 0.7 * best_score) {
      best_score = score;
      since_improve = 0;
    } else if (++since_improve > 40) {
      out.stalled = true;
      break;
    }

    // Residuals of the perturbed KKT system (regularized Q).
    Eigen::VectorXd rd = p.Q * st.x + p.q;
    if (me > 0) rd.noalias() += Et * st.y;
    for (int k = 0; k < mi; ++k) add_scaled_row(rd, p.arows[k], st.z[k]);
    for (int k = 0; k < nl; ++k) rd[p.lidx[k]] -= st.wl[k];
    for (int k = 0; k < nu; ++k) rd[p.uidx[k]] += st.wu[k];
    Eigen::VectorXd re = me > 0 ? Eigen::VectorXd(p.E * st.x - p.d)
                                : Eigen::VectorXd();
    Eigen::VectorXd ri(mi), rl(nl), ru(nu);
    for (int k = 0; k < mi; ++k)
      ri[k] = row_dot(p.arows[k], st.x) + st.s[k] - p.b[k];
    for (int k = 0; k < nl; ++k)
      rl[k] = st.x[p.lidx[k]] - p.lb[p.lidx[k]] - st.gl[k];
    for (int k = 0; k < nu; ++k)
      ru[k] = p.ub[p.uidx[k]] - st.x[p.uidx[k]] - st.gu[k];

    const double mu =
        mtot > 0 ? (st.z.dot(st.s) + st.wl.dot(st.gl) + st.wu.dot(st.gu)) / mtot
                 : 0.0;

    // Condensed matrix M = Q + A' diag(z/s) A + Dl + Du.
    M.triangularView<Eigen::Lower>() = p.Q.triangularView<Eigen::Lower>();
    Eigen::VectorXd wi(mi);
    for (int k = 0; k < mi; ++k) {
      const double w = st.z[k] / st.s[k];
      wi[k] = w;
      const SparseRow& r = p.arows[k];
      for (size_t a = 0; a < r.idx.size(); ++a)
        for (size_t c = 0; c <= a; ++c) {
          const int ia = r.idx[a], ic = r.idx[c];
          if (ia >= ic)
            M(ia, ic) += w * r.val[a] * r.val[c];
          else
            M(ic, ia) += w * r.val[a] * r.val[c];
        }
    }
    for (int k = 0; k < nl; ++k) M(p.lidx[k], p.lidx[k]) += st.wl[k] / st.gl[k];
    for (int k = 0; k < nu; ++k) M(p.uidx[k], p.uidx[k]) += st.wu[k] / st.gu[k];

    double jitter = 0.0;
    for (;;) {
      llt.compute(M.selfadjointView<Eigen::Lower>());
      if (llt.info() == Eigen::Success) break;
      jitter = jitter == 0.0 ? 1e-10 * (1.0 + M.diagonal().cwiseAbs().maxCoeff())
                             : jitter * 100.0;
      if (jitter > 1e2) break;
      M.diagonal().array() += jitter;
    }
    if (llt.info() != Eigen::Success) {
      out.stalled = true;
      break;
    }
    if (me > 0) {
      MinvEt = llt.solve(Et);
      Eigen::MatrixXd Se = p.E * MinvEt;
      double sj = 0.0;
      for (;;) {
        slt.compute(Se);
        if (slt.info() == Eigen::Success) break;
        sj = sj == 0.0 ? 1e-12 * (1.0 + Se.diagonal().cwiseAbs().maxCoeff())
                       : sj * 100.0;
        if (sj > 1e2) break;
        Se.diagonal().array() += sj;
      }
      if (slt.info() != Eigen::Success) {
        out.stalled = true;
        break;
      }
    }

    // One Newton direction for given complementarity targets.
    Eigen::VectorXd dx(n), dy(me), dz(mi), ds(mi), dwl(nl), dgl(nl), dwu(nu),
        dgu(nu);
    auto direction = [&](const Eigen::VectorXd& tz, const Eigen::VectorXd& tl,
                         const Eigen::VectorXd& tu) {
      Eigen::VectorXd rhs = -rd;
      for (int k = 0; k < mi; ++k) {
        const double term = (tz[k] - st.z[k] * st.s[k]) / st.s[k] + wi[k] * ri[k];
        add_scaled_row(rhs, p.arows[k], -term);
      }
      for (int k = 0; k < nl; ++k)
        rhs[p.lidx[k]] +=
            (tl[k] - st.wl[k] * st.gl[k]) / st.gl[k] - (st.wl[k] / st.gl[k]) * rl[k];
      for (int k = 0; k < nu; ++k)
        rhs[p.uidx[k]] -=
            (tu[k] - st.wu[k] * st.gu[k]) / st.gu[k] - (st.wu[k] / st.gu[k]) * ru[k];

      if (me > 0) {
        const Eigen::VectorXd Minv_rhs = llt.solve(rhs);
        dy = slt.solve(p.E * Minv_rhs + re);
        dx = Minv_rhs - MinvEt * dy;
        // Iterative refinement: the condensed matrix grows ill-conditioned as
        // the barrier vanishes and the raw solve loses several digits.
        for (int pass = 0; pass < 2; ++pass) {
          Eigen::VectorXd r1 =
              rhs - M.selfadjointView<Eigen::Lower>() * dx - Et * dy;
          Eigen::VectorXd r2 = -re - p.E * dx;
          const Eigen::VectorXd cy = slt.solve(p.E * llt.solve(r1) - r2);
          dx += llt.solve(r1 - Et * cy);
          dy += cy;
        }
      } else {
        dx = llt.solve(rhs);
        for (int pass = 0; pass < 2; ++pass)
          dx += llt.solve(rhs - M.selfadjointView<Eigen::Lower>() * dx);
      }
      for (int k = 0; k < mi; ++k) {
        ds[k] = -ri[k] - row_dot(p.arows[k], dx);
        dz[k] = (tz[k] - st.z[k] * st.s[k] - st.z[k] * ds[k]) / st.s[k];
      }
      for (int k = 0; k < nl; ++k) {
        dgl[k] = dx[p.lidx[k]] + rl[k];
        dwl[k] = (tl[k] - st.wl[k] * st.gl[k] - st.wl[k] * dgl[k]) / st.gl[k];
      }
      for (int k = 0; k < nu; ++k) {
        dgu[k] = ru[k] - dx[p.uidx[k]];
        dwu[k] = (tu[k] - st.wu[k] * st.gu[k] - st.wu[k] * dgu[k]) / st.gu[k];
      }
    };

    auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (int k = 0; k < v.size(); ++k)
        if (dv[k] < 0.0) a = std::min(a, -v[k] / dv[k]);
      return a;
    };

    // Predictor.
    direction(Eigen::VectorXd::Zero(mi), Eigen::VectorXd::Zero(nl),
              Eigen::VectorXd::Zero(nu));
    double sigma = 0.0;
    if (mtot > 0) {
      const double ap = std::min({max_step(st.s, ds), max_step(st.gl, dgl),
                                  max_step(st.gu, dgu)});
      const double ad = std::min({max_step(st.z, dz), max_step(st.wl, dwl),
                                  max_step(st.wu, dwu)});
      const double mu_aff =
          ((st.z + ad * dz).dot(st.s + ap * ds) +
           (st.wl + ad * dwl).dot(st.gl + ap * dgl) +
           (st.wu + ad * dwu).dot(st.gu + ap * dgu)) /
          mtot;
      const double ratio = mu > 0.0 ? mu_aff / mu : 0.0;
      sigma = ratio * ratio * ratio;

      // Corrector.
      Eigen::VectorXd tz(mi), tl(nl), tu(nu);
      for (int k = 0; k < mi; ++k) tz[k] = sigma * mu - dz[k] * ds[k];
      for (int k = 0; k < nl; ++k) tl[k] = sigma * mu - dwl[k] * dgl[k];
      for (int k = 0; k < nu; ++k) tu[k] = sigma * mu - dwu[k] * dgu[k];
      direction(tz, tl, tu);
    }

    double ap = 1.0, ad = 1.0;
    if (mtot > 0) {
      const double tau = std::max(0.995, 1.0 - 10.0 * mu);
      ap = tau * std::min({max_step(st.s, ds), max_step(st.gl, dgl),
                           max_step(st.gu, dgu)});
      ad = tau * std::min({max_step(st.z, dz), max_step(st.wl, dwl),
                           max_step(st.wu, dwu)});
      ap = std::min(ap, 1.0);
      ad = std::min(ad, 1.0);
      if (ap < 1e-12 && ad < 1e-12) {
        out.stalled = true;
        break;
      }
    }
    st.x += ap * dx;
    st.s += ap * ds;
    st.gl += ap * dgl;
    st.gu += ap * dgu;
    st.y += ad * dy;
    st.z += ad * dz;
    st.wl += ad * dwl;
    st.wu += ad * dwu;
  }
  // Report the best iterate seen; late iterations can drift once the
  // complementarity products hit floating-point noise.
  if (!out.converged && best_st.x.size() > 0) {
    const TrueResiduals tr = true_residuals(p, Qorig, best_st);
    out.converged = tr.stat <= feas_tol && tr.prim <= feas_tol &&
                    tr.comp <= comp_tol;
    out.st = std::move(best_st);
  } else {
    out.st = std::move(st);
  }
  return out;
}

// Least-squares re-fit of the multipliers on the active set. The interior
// point iterates carry the primal solution to machine precision while the
// duals keep a few microunits of noise; refitting them against the exact
// stationarity system recovers the lost digits.
bool polish_duals_at(const IpmProblem& ip, const Eigen::MatrixXd& Qorig,
                     double feas_tol, double comp_tol, double act_tol,
                     IpmState& st) {
  const int n = ip.n;
  std::vector<int> ai, al, au;
  for (int k = 0; k < ip.mi; ++k) {
    const double slack = ip.b[k] - row_dot(ip.arows[k], st.x);
    if (slack <= act_tol * (1.0 + std::abs(ip.b[k]))) ai.push_back(k);
  }
  for (size_t k = 0; k < ip.lidx.size(); ++k)
    if (st.x[ip.lidx[k]] - ip.lb[ip.lidx[k]] <= act_tol) al.push_back((int)k);
  for (size_t k = 0; k < ip.uidx.size(); ++k)
    if (ip.ub[ip.uidx[k]] - st.x[ip.uidx[k]] <= act_tol) au.push_back((int)k);

  IpmState cand = st;
  // Equality-constrained KKT solve on the active set: recovers both the
  // primal point and the multipliers to machine precision when the active
  // set is identified correctly. Constraints whose fitted multiplier comes
  // out negative are pruned and the solve repeated; the candidate is only
  // accepted if its exact residuals pass, so a wrong guess cannot make
  // things worse. The small proximal term pins directions the active set
  // leaves flat to the current iterate instead of letting the solve drift.
  const double prox = 1e-8;
  for (int round = 0; round < 30; ++round) {
    const int cols =
        ip.me + (int)ai.size() + (int)al.size() + (int)au.size();
    if (cols == 0 && ip.me == 0) break;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, cols);
    int c = 0;
    for (int r = 0; r < ip.me; ++r) B.col(c++) = ip.E.row(r).transpose();
    for (int k : ai) {
      const SparseRow& row = ip.arows[k];
      for (size_t a = 0; a < row.idx.size(); ++a) B(row.idx[a], c) = row.val[a];
      ++c;
    }
    for (int k : al) B(ip.lidx[k], c++) = -1.0;
    for (int k : au) B(ip.uidx[k], c++) = 1.0;

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + cols, n + cols);
    K.topLeftCorner(n, n) = Qorig;
    K.topLeftCorner(n, n).diagonal().array() += prox;
    K.topRightCorner(n, cols) = B;
    K.bottomLeftCorner(cols, n) = B.transpose();
    Eigen::VectorXd rhs(n + cols);
    rhs.head(n) = -ip.q + prox * st.x;
    c = n;
    for (int r = 0; r < ip.me; ++r) rhs[c++] = ip.d[r];
    for (int k : ai) rhs[c++] = ip.b[k];
    for (int k : al) rhs[c++] = -ip.lb[ip.lidx[k]];
    for (int k : au) rhs[c++] = ip.ub[ip.uidx[k]];

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K);
    cod.setThreshold(1e-10);
    const Eigen::VectorXd d = cod.solve(rhs);

    const double neg_tol = 1e-8 * (1.0 + d.cwiseAbs().maxCoeff());
    std::vector<int> ai2, al2, au2;
    c = n + ip.me;
    for (int k : ai)
      if (d[c++] >= -neg_tol) ai2.push_back(k);
    for (int k : al)
      if (d[c++] >= -neg_tol) al2.push_back(k);
    for (int k : au)
      if (d[c++] >= -neg_tol) au2.push_back(k);
    const bool clean = ai2.size() == ai.size() && al2.size() == al.size() &&
                       au2.size() == au.size();
    if (clean || round == 29) {
      cand.x = d.head(n);
      cand.z.setZero();
      cand.wl.setZero();
      cand.wu.setZero();
      c = n;
      for (int r = 0; r < ip.me; ++r) cand.y[r] = d[c++];
      for (int k : ai) cand.z[k] = std::max(0.0, d[c++]);
      for (int k : al) cand.wl[k] = std::max(0.0, d[c++]);
      for (int k : au) cand.wu[k] = std::max(0.0, d[c++]);
      break;
    }
    ai = std::move(ai2);
    al = std::move(al2);
    au = std::move(au2);
  }
  const TrueResiduals tr = true_residuals(ip, Qorig, cand);
  if (tr.stat <= feas_tol && tr.prim <= feas_tol && tr.comp <= comp_tol) {
    st = std::move(cand);
    return true;
  }
  return false;
}

bool polish_duals(const IpmProblem& ip, const Eigen::MatrixXd& Qorig,
                  double feas_tol, double comp_tol, IpmState& st) {
  // The iterate resolves the active set only to its own accuracy, so widen
  // the activity window until a consistent multiplier fit appears.
  for (double act_tol : {1e-7, 1e-6, 1e-5, 1e-4})
    if (polish_duals_at(ip, Qorig, feas_tol, comp_tol, act_tol, st))
      return true;
  return false;
}

IpmProblem prepare(const QuadraticProgram& p) {
  IpmProblem ip;
  ip.n = p.n;
  ip.me = static_cast<int>(p.eq_A.rows());
  ip.mi = static_cast<int>(p.ineq_A.rows());
  ip.Q = p.Q;
  for (int i = 0; i < ip.n; ++i)
    if (ip.Q(i, i) == 0.0) ip.Q(i, i) = kTieEps;
  ip.q = p.q;
  ip.E = p.eq_A;
  ip.d = p.eq_b;
  ip.arows = to_sparse_rows(p.ineq_A);
  ip.b = p.ineq_b;
  ip.lb = p.lb.size() ? p.lb
                      : Eigen::VectorXd::Constant(p.n, -qp_infinity());
  ip.ub = p.ub.size() ? p.ub
                      : Eigen::VectorXd::Constant(p.n, qp_infinity());
  for (int i = 0; i < ip.n; ++i) {
    if (std::isfinite(ip.lb[i])) ip.lidx.push_back(i);
    if (std::isfinite(ip.ub[i])) ip.uidx.push_back(i);
  }
  return ip;
}

void validate_program(const QuadraticProgram& p) {
  if (p.Q.rows() != p.n || p.Q.cols() != p.n || p.q.size() != p.n)
    throw DimensionMismatch("Q/q size must match n");
  if (p.eq_A.rows() != p.eq_b.size() ||
      (p.eq_A.rows() > 0 && p.eq_A.cols() != p.n))
    throw DimensionMismatch("equality rows must have length n");
  if (p.ineq_A.rows() != p.ineq_b.size() ||
      (p.ineq_A.rows() > 0 && p.ineq_A.cols() != p.n))
    throw DimensionMismatch("inequality rows must have length n");
  if (p.lb.size() && p.lb.size() != p.n)
    throw DimensionMismatch("lb must have length n");
  if (p.ub.size() && p.ub.size() != p.n)
    throw DimensionMismatch("ub must have length n");
  const double asym = (p.Q - p.Q.transpose()).cwiseAbs().maxCoeff();
  if (p.n > 0 && asym > 1e-12)
    throw ModelError("Q is not symmetric within 1e-12");
  if (!is_valid_cost_matrix(p.Q))
    throw ModelError("Q is not positive semidefinite");
}

// Elastic feasibility problem: min u s.t. Ex=d, Ax - u <= b,
// lb - u <= x <= ub + u, u >= 0. Always feasible; minimum exceeding the
// tolerance certifies that the original constraints are inconsistent.
bool feasible_via_phase1(const QuadraticProgram& p, const SolverConfig& cfg) {
  if (p.eq_A.rows() > 0) {
    // Equality span check: inconsistent equalities certify infeasibility.
    Eigen::VectorXd xe = p.eq_A.colPivHouseholderQr().solve(p.eq_b);
    const double res = (p.eq_A * xe - p.eq_b).cwiseAbs().maxCoeff();
    if (res > 1e2 * cfg.feas_tol * (1.0 + p.eq_b.cwiseAbs().maxCoeff()))
      return false;
  }
  QuadraticProgram ph;
  ph.n = p.n + 1;
  ph.Q = Eigen::MatrixXd::Zero(ph.n, ph.n);
  ph.q = Eigen::VectorXd::Zero(ph.n);
  ph.q[p.n] = 1.0;
  ph.eq_A = Eigen::MatrixXd::Zero(p.eq_A.rows(), ph.n);
  if (p.eq_A.rows() > 0) ph.eq_A.leftCols(p.n) = p.eq_A;
  ph.eq_b = p.eq_b;

  const Eigen::VectorXd lb =
      p.lb.size() ? p.lb : Eigen::VectorXd::Constant(p.n, -qp_infinity());
  const Eigen::VectorXd ub =
      p.ub.size() ? p.ub : Eigen::VectorXd::Constant(p.n, qp_infinity());
  int extra = 0;
  for (int i = 0; i < p.n; ++i)
    extra += (std::isfinite(lb[i]) ? 1 : 0) + (std::isfinite(ub[i]) ? 1 : 0);
  const int mi = static_cast<int>(p.ineq_A.rows());
  ph.ineq_A = Eigen::MatrixXd::Zero(mi + extra, ph.n);
  ph.ineq_b = Eigen::VectorXd::Zero(mi + extra);
  if (mi > 0) {
    ph.ineq_A.topLeftCorner(mi, p.n) = p.ineq_A;
    ph.ineq_A.col(p.n).head(mi).setConstant(-1.0);
    ph.ineq_b.head(mi) = p.ineq_b;
  }
  int r = mi;
  for (int i = 0; i < p.n; ++i) {
    if (std::isfinite(lb[i])) {
      ph.ineq_A(r, i) = -1.0;
      ph.ineq_A(r, p.n) = -1.0;
      ph.ineq_b[r] = -lb[i];
      ++r;
    }
    if (std::isfinite(ub[i])) {
      ph.ineq_A(r, i) = 1.0;
      ph.ineq_A(r, p.n) = -1.0;
      ph.ineq_b[r] = ub[i];
      ++r;
    }
  }
  ph.lb = Eigen::VectorXd::Constant(ph.n, -qp_infinity());
  ph.ub = Eigen::VectorXd::Constant(ph.n, qp_infinity());
  ph.lb[p.n] = 0.0;

  IpmProblem ip = prepare(ph);
  const IpmOutcome oc =
      ipm_solve(ip, ph.Q, cfg.feas_tol, cfg.comp_tol, 500);
  if (!oc.converged) return true;  // inconclusive: do not claim infeasibility
  return oc.st.x[p.n] <= 10.0 * cfg.feas_tol;
}

}  // namespace

bool is_valid_cost_matrix(const Eigen::MatrixXd& Q) {
  if (Q.rows() != Q.cols()) return false;
  const int n = static_cast<int>(Q.rows());
  if (n == 0) return true;
  if (Q.isDiagonal(0.0)) return Q.diagonal().minCoeff() >= -1e-12;
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Q);
  const double scale = 1.0 + Q.diagonal().cwiseAbs().maxCoeff();
  return ldlt.info() != Eigen::NumericalIssue ||
         ldlt.vectorD().minCoeff() >= -1e-10 * scale;
}

QpSolution solve_qp(const QuadraticProgram& p, const SolverConfig& cfg) {
  validate_program(p);
  QpSolution sol;
  if (p.n == 0) {
    sol.status = QpStatus::Optimal;
    sol.objective = p.constant;
    sol.x.resize(0);
    sol.mu_eq.resize(0);
    sol.mu_ineq.resize(0);
    sol.mu_lb.resize(0);
    sol.mu_ub.resize(0);
    return sol;
  }

  IpmProblem ip = prepare(p);
  // Immediate inconsistencies.
  for (int i = 0; i < p.n; ++i)
    if (ip.lb[i] > ip.ub[i] + cfg.feas_tol) {
      sol.status = QpStatus::Infeasible;
      return sol;
    }
  for (int k = 0; k < ip.mi; ++k)
    if (ip.arows[k].idx.empty() && ip.b[k] < -cfg.feas_tol) {
      sol.status = QpStatus::Infeasible;
      return sol;
    }

  // Hard cap 10000; the stall check exits far earlier in practice. A stalled
  // run is retried from progressively different central-path starting points,
  // which rescues the rare instances where the first trajectory collapses.
  IpmOutcome oc = ipm_solve(ip, p.Q, cfg.feas_tol, cfg.comp_tol, 10000);
  if (!oc.converged)
    oc.converged =
        polish_duals(ip, p.Q, cfg.feas_tol, cfg.comp_tol, oc.st);
  for (double scale : {10.0, 100.0, 0.1}) {
    if (oc.converged) break;
    IpmOutcome retry =
        ipm_solve(ip, p.Q, cfg.feas_tol, cfg.comp_tol, 10000, scale);
    if (!retry.converged)
      retry.converged =
          polish_duals(ip, p.Q, cfg.feas_tol, cfg.comp_tol, retry.st);
    const TrueResiduals a = true_residuals(ip, p.Q, oc.st);
    const TrueResiduals b = true_residuals(ip, p.Q, retry.st);
    if (retry.converged || b.stat + b.prim + b.comp < a.stat + a.prim + a.comp)
      oc = std::move(retry);
  }

  sol.x = oc.st.x;
  sol.mu_eq = oc.st.y;
  sol.mu_ineq = oc.st.z;
  sol.mu_lb = Eigen::VectorXd::Zero(p.n);
  sol.mu_ub = Eigen::VectorXd::Zero(p.n);
  for (size_t k = 0; k < ip.lidx.size(); ++k) sol.mu_lb[ip.lidx[k]] = oc.st.wl[k];
  for (size_t k = 0; k < ip.uidx.size(); ++k) sol.mu_ub[ip.uidx[k]] = oc.st.wu[k];
  sol.objective = 0.5 * sol.x.dot(p.Q * sol.x) + p.q.dot(sol.x) + p.constant;
  sol.iterations = oc.iterations;

  if (oc.converged) {
    sol.status = QpStatus::Optimal;
  } else {
    sol.status = feasible_via_phase1(p, cfg) ? QpStatus::IterLimit
                                             : QpStatus::Infeasible;
  }
  return sol;
}

KktResiduals qp_kkt_residuals(const QuadraticProgram& p, const QpSolution& s) {
  if (s.x.size() != p.n) throw DimensionMismatch("solution x must have length n");
  const int me = static_cast<int>(p.eq_A.rows());
  const int mi = static_cast<int>(p.ineq_A.rows());
  if (s.mu_eq.size() != me) throw DimensionMismatch("mu_eq size mismatch");
  if (s.mu_ineq.size() != mi) throw DimensionMismatch("mu_ineq size mismatch");

  KktResiduals r;
  Eigen::VectorXd g = p.Q * s.x + p.q;
  if (me > 0) g.noalias() += p.eq_A.transpose() * s.mu_eq;
  if (mi > 0) g.noalias() += p.ineq_A.transpose() * s.mu_ineq;
  if (s.mu_lb.size() == p.n) g -= s.mu_lb;
  if (s.mu_ub.size() == p.n) g += s.mu_ub;
  r.stationarity_inf = p.n ? g.cwiseAbs().maxCoeff() : 0.0;

  if (me > 0)
    r.primal_inf = (p.eq_A * s.x - p.eq_b).cwiseAbs().maxCoeff();
  for (int k = 0; k < mi; ++k) {
    const double viol = p.ineq_A.row(k).dot(s.x) - p.ineq_b[k];
    r.primal_inf = std::max(r.primal_inf, viol);
    r.dual_inf = std::max(r.dual_inf, -s.mu_ineq[k]);
    r.comp_inf = std::max(r.comp_inf, std::abs(s.mu_ineq[k] * viol));
  }
  for (int i = 0; i < p.n; ++i) {
    if (p.lb.size() && std::isfinite(p.lb[i])) {
      const double slack = s.x[i] - p.lb[i];
      r.primal_inf = std::max(r.primal_inf, -slack);
      if (s.mu_lb.size() == p.n) {
        r.dual_inf = std::max(r.dual_inf, -s.mu_lb[i]);
        r.comp_inf = std::max(r.comp_inf, std::abs(s.mu_lb[i] * slack));
      }
    }
    if (p.ub.size() && std::isfinite(p.ub[i])) {
      const double slack = p.ub[i] - s.x[i];
      r.primal_inf = std::max(r.primal_inf, -slack);
      if (s.mu_ub.size() == p.n) {
        r.dual_inf = std::max(r.dual_inf, -s.mu_ub[i]);
        r.comp_inf = std::max(r.comp_inf, std::abs(s.mu_ub[i] * slack));
      }
    }
  }
  return r;
}

}  // namespace vppm
