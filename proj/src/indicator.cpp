#include "randlod/indicator.hpp"

#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "randlod/error.hpp"

namespace randlod {

IndicatorMatrices compute_SB(const PatchProblem& problem, const CoefficientField& aPatch, const OfflineDatabase& db,
                             const MuWeights& mu) {
  if (!db.retainsCorrectors) fail(ErrorKind::Capability, "compute_SB: database was built without corrector values");
  if (mu.N != db.count()) fail(ErrorKind::Data, "compute_SB: weight vector does not match the database");
  const int nc = problem.corners();
  const int ne = problem.fineElementCount();
  if (static_cast<int>(aPatch.values.size()) != ne) fail(ErrorKind::Data, "compute_SB: coefficient does not match the patch");

  const OfflineCoefficients& oc = db.coefficients;
  const Box fe = oc.fineElements;
  const int rc = oc.finePerCell;
  const Box table{{rc, oc.dim == 2 ? rc : 1}};

  // Combined corrector sum_i mu_i Q_i.
  Mat qmu = mu.mu0 * db.correctorValues[0];
  for (int i : mu.active) qmu += db.correctorValues[static_cast<std::size_t>(i)];
  std::vector<char> activeCell(static_cast<std::size_t>(oc.count()), 0);
  for (int i : mu.active) activeCell[static_cast<std::size_t>(i - 1)] = 1;

  const Mat& kref = problem.fineStiffness();
  IndicatorMatrices out;
  out.S = Mat::Zero(nc, nc);
  out.B = Mat::Zero(nc, nc);
  Mat w(nc, nc);  // element node q x corner j
  for (int e = 0; e < ne; ++e) {
    const double a = aPatch.values[static_cast<std::size_t>(e)];
    if (!(a > 0.0)) fail(ErrorKind::Data, "compute_SB: nonpositive coefficient value");
    const double s = std::sqrt(a);
    const double base = oc.base.values[static_cast<std::size_t>(e)];
    const Index2 c = fe.coords(e);
    const int cell = oc.cells.index(c[0] / rc, c[1] / rc);
    const double bcell = oc.bPerCell[static_cast<std::size_t>(table.index(c[0] % rc, c[1] % rc))];
    const bool active = activeCell[static_cast<std::size_t>(cell)] != 0;
    const bool center = problem.inCenter(e);
    // Abar = sum_i mu_i A_i = base + b on active cells (sum mu_i = 1). The weights
    // (sqrt(A) - A_i/sqrt(A)) are formed as (A - A_i)/sqrt(A) so that they vanish
    // exactly when the sample coincides with an offline coefficient.
    const double abar = active ? base + bcell : base;
    const double d0 = (a - base) / s;
    const double d1 = active ? (a - abar) / s : 0.0;
    const double dc = (a - abar) / s;
    const Mat* qi = active ? &db.correctorValues[static_cast<std::size_t>(cell + 1)] : nullptr;
    const int* nodes = problem.elementNodes(e);
    for (int q = 0; q < nc; ++q) {
      for (int j = 0; j < nc; ++j) {
        double v;
        if (qi) {
          const double own = (*qi)(nodes[q], j);
          v = -(d0 * (qmu(nodes[q], j) - own) + d1 * own);
        } else {
          v = -d0 * qmu(nodes[q], j);
        }
        if (center) v += dc * problem.hat(e, q, j);
        w(q, j) = v;
      }
    }
    out.S.noalias() += w.transpose() * kref * w;
    if (center) {
      Mat lam(nc, nc);
      for (int q = 0; q < nc; ++q)
        for (int j = 0; j < nc; ++j) lam(q, j) = problem.hat(e, q, j);
      out.B.noalias() += a * (lam.transpose() * kref * lam);
    }
  }
  out.S = 0.5 * (out.S + out.S.transpose()).eval();
  out.B = 0.5 * (out.B + out.B.transpose()).eval();
  return out;
}

double indicator_ET(const IndicatorMatrices& m) {
  const Eigen::Index n = m.S.rows();
  if (n < 2 || m.S.cols() != n || m.B.rows() != n || m.B.cols() != n)
    fail(ErrorKind::Data, "indicator_ET: matrices must be square of equal size >= 2");
  Eigen::HouseholderQR<Mat> qr(Vec::Ones(n));
  const Mat Q = qr.householderQ() * Mat::Identity(n, n);
  const Mat V = Q.rightCols(n - 1);
  const Mat Sp = V.transpose() * m.S * V;
  const Mat Bp = V.transpose() * m.B * V;
  if (Sp.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const GenEig eig = gen_eig_max(0.5 * (Sp + Sp.transpose()), 0.5 * (Bp + Bp.transpose()));
  return std::sqrt(std::max(0.0, eig.value));
}

std::vector<double> indicator_field(const PatchProblem& problem, const OfflineDatabase& db, const DefectSample& sample) {
  const NestedMesh& mesh = problem.mesh();
  check_geometry(db, mesh);
  std::vector<double> out(static_cast<std::size_t>(mesh.coarseCount()));
  for (int T = 0; T < mesh.coarseCount(); ++T) {
    const PatchGeometry p = patch(mesh, T, problem.m());
    const CoefficientField a = realize_patch(db.model, sample, mesh, p);
    out[static_cast<std::size_t>(T)] = indicator_ET(compute_SB(problem, a, db, extract_mu(sample, p)));
  }
  return out;
}

}  // namespace randlod
