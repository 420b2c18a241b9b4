#include "randlod/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "randlod/error.hpp"

namespace randlod {

PatchProblem::PatchProblem(const NestedMesh& mesh, int m, InterpolationKind kind)
    : mesh_(mesh), ref_(patch(mesh, 0, m)), kind_(kind), corners_(mesh.dim == 2 ? 4 : 2) {
  const int r = mesh.refinement;
  const int d = mesh.dim;
  const Box fn = ref_.localFineNodes();
  const Box fe = ref_.localFineElements();
  const Box ce = ref_.localCoarseElements();
  const Box cn = ref_.localCoarseNodes();
  const Box offsets = mesh.axes(r);
  const Box elemNodes = mesh.axes(r + 1);
  kref_ = q1_stiffness(d, mesh.h());
  mref_ = q1_mass(d, mesh.h());

  elementNodes_.resize(static_cast<std::size_t>(fe.size()) * corners_);
  coarseOf_.resize(static_cast<std::size_t>(fe.size()));
  offsetOf_.resize(static_cast<std::size_t>(fe.size()));
  for (int e = 0; e < fe.size(); ++e) {
    const Index2 c = fe.coords(e);
    for (int a = 0; a < corners_; ++a)
      elementNodes_[static_cast<std::size_t>(e) * corners_ + a] = ref_.fineNodeLocal(c[0] + (a & 1), c[1] + (a >> 1));
    coarseOf_[static_cast<std::size_t>(e)] = ce.index(c[0] / r, c[1] / r);
    offsetOf_[static_cast<std::size_t>(e)] = offsets.index(c[0] % r, c[1] % r);
  }
  centerElement_ = ce.index(ref_.centerLocal);
  for (int e = 0; e < fe.size(); ++e)
    if (coarseOf_[static_cast<std::size_t>(e)] == centerElement_) centerFine_.push_back(e);

  const Mat hats = element_hats(d, r);
  hatsAtElement_.resize(offsets.size() * corners_, corners_);
  for (int o = 0; o < offsets.size(); ++o) {
    const Index2 oc = offsets.coords(o);
    for (int a = 0; a < corners_; ++a)
      hatsAtElement_.row(o * corners_ + a) = hats.row(elemNodes.index(oc[0] + (a & 1), oc[1] + (a >> 1)));
  }

  coarseCorners_.resize(static_cast<std::size_t>(ce.size()) * corners_);
  for (int E = 0; E < ce.size(); ++E) {
    const Index2 c = ce.coords(E);
    for (int a = 0; a < corners_; ++a) {
      int i0 = c[0] + (a & 1), i1 = c[1] + (a >> 1);
      if (ref_.periodic) {
        i0 = wrap(i0, cn.n[0]);
        i1 = wrap(i1, cn.n[1]);
      }
      coarseCorners_[static_cast<std::size_t>(E) * corners_ + a] = cn.index(i0, i1);
    }
  }

  // free nodes: interior of the box, or everything but one pinned node on the torus
  freeIndex_.assign(static_cast<std::size_t>(fn.size()), -1);
  if (ref_.periodic) pinned_ = 0;
  for (int k = 0; k < fn.size(); ++k) {
    const bool fixed = ref_.periodic ? k == pinned_ : ref_.fineBoundary[static_cast<std::size_t>(k)] != 0;
    if (!fixed) freeIndex_[static_cast<std::size_t>(k)] = freeCount_++;
  }

  // I_H rows keyed by global coarse node, so nodes seen twice by a box that
  // spans the torus are merged
  const Mat proj = element_projection(d, r, kind);
  const double weight = 1.0 / corners_;
  std::map<int, std::vector<std::pair<int, double>>> rows;
  std::map<int, double> rowTotals;
  for (int E = 0; E < ce.size(); ++E) {
    const Index2 c = ce.coords(E);
    for (int a = 0; a < corners_; ++a) {
      const int z = ref_.coarseNodes[static_cast<std::size_t>(coarseCorners(E)[a])];
      auto& row = rows[z];
      for (int k = 0; k < elemNodes.size(); ++k) {
        const double v = proj(a, k);
        if (v == 0.0) continue;
        const Index2 o = elemNodes.coords(k);
        const int node = ref_.fineNodeLocal(c[0] * r + o[0], c[1] * r + o[1]);
        rowTotals[z] += weight * v;
        const int f = freeIndex_[static_cast<std::size_t>(node)];
        if (f >= 0) row.emplace_back(f, weight * v);
      }
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> ones;
  for (const auto& [z, row] : rows) {
    std::map<int, double> merged;
    for (const auto& [f, v] : row) merged[f] += v;
    double big = 0.0;
    for (const auto& [f, v] : merged) big = std::max(big, std::abs(v));
    if (big < 1e-14) continue;
    const int ri = static_cast<int>(constraintNodes_.size());
    for (const auto& [f, v] : merged)
      if (v != 0.0) trip.emplace_back(ri, f, v);
    constraintNodes_.push_back(z);
    ones.push_back(rowTotals[z]);
  }
  constraints_.resize(static_cast<int>(constraintNodes_.size()), freeCount_);
  constraints_.setFromTriplets(trip.begin(), trip.end());
  constraints_.makeCompressed();
  constraintOnes_ = Eigen::Map<Vec>(ones.data(), static_cast<Eigen::Index>(ones.size()));

  // upper-triangular stiffness pattern on free nodes
  std::vector<std::vector<int>> cols(static_cast<std::size_t>(freeCount_));
  for (int e = 0; e < fe.size(); ++e) {
    const int* nodes = elementNodes(e);
    for (int a = 0; a < corners_; ++a)
      for (int b = 0; b < corners_; ++b) {
        const int fa = freeIndex_[static_cast<std::size_t>(nodes[a])];
        const int fb = freeIndex_[static_cast<std::size_t>(nodes[b])];
        if (fa >= 0 && fb >= 0 && fa <= fb) cols[static_cast<std::size_t>(fb)].push_back(fa);
      }
  }
  colPtr_.assign(static_cast<std::size_t>(freeCount_) + 1, 0);
  for (int j = 0; j < freeCount_; ++j) {
    auto& c = cols[static_cast<std::size_t>(j)];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    colPtr_[static_cast<std::size_t>(j) + 1] = colPtr_[static_cast<std::size_t>(j)] + static_cast<int>(c.size());
    rowIdx_.insert(rowIdx_.end(), c.begin(), c.end());
  }
  scatter_.assign(static_cast<std::size_t>(fe.size()) * corners_ * corners_, -1);
  for (int e = 0; e < fe.size(); ++e) {
    const int* nodes = elementNodes(e);
    for (int a = 0; a < corners_; ++a)
      for (int b = 0; b < corners_; ++b) {
        const int fa = freeIndex_[static_cast<std::size_t>(nodes[a])];
        const int fb = freeIndex_[static_cast<std::size_t>(nodes[b])];
        if (fa < 0 || fb < 0 || fa > fb) continue;
        const auto first = rowIdx_.begin() + colPtr_[static_cast<std::size_t>(fb)];
        const auto last = rowIdx_.begin() + colPtr_[static_cast<std::size_t>(fb) + 1];
        scatter_[(static_cast<std::size_t>(e) * corners_ + a) * corners_ + b] =
            static_cast<int>(std::lower_bound(first, last, fa) - rowIdx_.begin());
      }
  }
}

std::vector<double> PatchProblem::stiffnessValues(const CoefficientField& a) const {
  if (static_cast<int>(a.values.size()) != fineElementCount())
    fail(ErrorKind::Data, "corrector: coefficient does not match the patch");
  std::vector<double> vals(rowIdx_.size(), 0.0);
  const int ne = fineElementCount();
  for (int e = 0; e < ne; ++e) {
    const double ae = a.values[static_cast<std::size_t>(e)];
    if (!(ae > 0.0)) fail(ErrorKind::Data, "corrector: coefficient must be positive");
    const int* sc = &scatter_[static_cast<std::size_t>(e) * corners_ * corners_];
    for (int ab = 0; ab < corners_ * corners_; ++ab)
      if (sc[ab] >= 0) vals[static_cast<std::size_t>(sc[ab])] += ae * kref_(ab / corners_, ab % corners_);
  }
  return vals;
}

Mat PatchProblem::loadMatrix(const CoefficientField& a) const {
  Mat rhs = Mat::Zero(fineNodeCount(), corners_);
  Mat lam(corners_, corners_);
  for (int e : centerFine_) {
    for (int q = 0; q < corners_; ++q)
      for (int j = 0; j < corners_; ++j) lam(q, j) = hat(e, q, j);
    const Mat g = a.values[static_cast<std::size_t>(e)] * (kref_ * lam);
    const int* nodes = elementNodes(e);
    for (int q = 0; q < corners_; ++q) rhs.row(nodes[q]) += g.row(q);
  }
  return rhs;
}

CorrectorSolver::CorrectorSolver(const PatchProblem& problem) : problem_(problem) {
  if (problem.pinnedNode() < 0) {
    const Box nodes = problem.reference().localFineNodes();
    const Box interior{{nodes.n[0] - 2, problem.mesh().dim == 2 ? nodes.n[1] - 2 : 1}};
    grid_ = std::make_unique<GridCholesky>(interior, problem.patternColPtr(), problem.patternRowIdx());
    grid_->setSparseRhs(problem.constraints().transpose());
  } else {
    factor_ = std::make_unique<CholmodFactor>(problem.freeCount(), problem.patternColPtr(), problem.patternRowIdx());
  }
  ct_ = Mat(problem.constraints().transpose());
}

CorrectorSolver::~CorrectorSolver() = default;

CorrectorBasis CorrectorSolver::solve(const CoefficientField& aPatch) {
  const PatchProblem& p = problem_;
  const std::vector<double> vals = p.stiffnessValues(aPatch);
  rcond_ = grid_ ? grid_->factorize(vals) : factor_->factorize(vals);
  if (!(rcond_ >= 1e-14)) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "corrector: reciprocal condition estimate %.3e below 1e-14", rcond_);
    fail(ErrorKind::Solver, buf);
  }
  const int nc = p.corners();
  const Mat full = p.loadMatrix(aPatch);
  const std::vector<int>& freeIdx = p.freeIndex();
  Mat z(p.freeCount(), nc);
  for (int k = 0; k < p.fineNodeCount(); ++k)
    if (freeIdx[static_cast<std::size_t>(k)] >= 0) z.row(freeIdx[static_cast<std::size_t>(k)]) = full.row(k);
  const auto& c = p.constraints();
  const int ncon = static_cast<int>(c.rows());
  Eigen::RowVectorXd shift = Eigen::RowVectorXd::Zero(nc);

  if (grid_) {
    // K = L L^T:  S = G^T G with G = L^{-1} C^T, then one backward sweep
    grid_->forwardSparse();
    grid_->forward(z);
    Eigen::LLT<Mat> llt(grid_->sparseGram());
    if (llt.info() != Eigen::Success) fail(ErrorKind::Solver, "corrector: constraint Schur complement is singular");
    const Mat y = llt.solve(grid_->sparseTransposeTimes(z));
    grid_->sparseSubtract(z, y);
    grid_->backward(z);
  } else {
    Mat w = ct_;
    factor_->solve(w);
    factor_->solve(z);
    Mat s = c * w;
    s = 0.5 * (s + s.transpose()).eval();
    Mat aug = Mat::Zero(ncon + 1, ncon + 1);
    aug.topLeftCorner(ncon, ncon) = s;
    aug.topRightCorner(ncon, 1) = -p.constraintOnes();
    aug.bottomLeftCorner(1, ncon) = p.constraintOnes().transpose();
    Mat rhs(ncon + 1, nc);
    rhs.topRows(ncon) = c * z;
    rhs.bottomRows(1) = full.colwise().sum();
    Eigen::FullPivLU<Mat> lu(aug);
    if (!lu.isInvertible()) fail(ErrorKind::Solver, "corrector: periodic constraint system is singular");
    const Mat sol = lu.solve(rhs);
    z.noalias() -= w * sol.topRows(ncon);
    shift = sol.bottomRows(1);
  }

  CorrectorBasis basis;
  basis.values = Mat::Zero(p.fineNodeCount(), nc);
  for (int k = 0; k < p.fineNodeCount(); ++k) {
    const int f = freeIdx[static_cast<std::size_t>(k)];
    if (f >= 0) basis.values.row(k) = z.row(f);
  }
  if (p.pinnedNode() >= 0) basis.values.rowwise() += shift;
  return basis;
}

Mat local_stiffness(const PatchProblem& p, const CoefficientField& a, const CorrectorBasis& corrector) {
  using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;
  const int nc = p.corners();
  Mat b = Mat::Zero(nc, p.coarseNodeCount());
  const Small kref = p.fineStiffness();
  Small w(nc, nc), hats(nc, nc), contrib(nc, nc);
  for (int e = 0; e < p.fineElementCount(); ++e) {
    const int* nodes = p.elementNodes(e);
    const bool center = p.inCenter(e);
    for (int q = 0; q < nc; ++q)
      for (int c = 0; c < nc; ++c) hats(q, c) = p.hat(e, q, c);
    for (int j = 0; j < nc; ++j)
      for (int q = 0; q < nc; ++q) w(q, j) = (center ? hats(q, j) : 0.0) - corrector.values(nodes[q], j);
    contrib.noalias() = hats.transpose() * (kref * w);
    const double ae = a.values[static_cast<std::size_t>(e)];
    const int* cc = p.coarseCorners(p.coarseElementOf(e));
    for (int c = 0; c < nc; ++c)
      for (int j = 0; j < nc; ++j) b(j, cc[c]) += ae * contrib(c, j);
  }
  return b;
}

double row_sum_check(const Mat& localStiffness) {
  return localStiffness.rowwise().sum().cwiseAbs().maxCoeff();
}

}  // namespace randlod
