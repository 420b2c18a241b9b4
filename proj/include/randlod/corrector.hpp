#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "randlod/coefficient.hpp"
#include "randlod/interpolation.hpp"
#include "randlod/linalg.hpp"
#include "randlod/mesh.hpp"

namespace randlod {

/// Nodal values of C_{m,T} lambda_j on the local fine nodes of the patch, one
/// column per corner j of the center element (x-fastest). Boundary rows are zero.
struct CorrectorBasis {
  Mat values;
};

/// Everything about a corrector problem that depends only on (mesh, m, I_H):
/// the reference patch, free-node numbering, constraint rows and the fixed
/// stiffness pattern with its element scatter map. Every patch of the mesh is
/// a translate of the reference patch, so one instance serves all elements.
class PatchProblem {
 public:
  PatchProblem(const NestedMesh& mesh, int m, InterpolationKind kind);

  const NestedMesh& mesh() const { return mesh_; }
  const PatchGeometry& reference() const { return ref_; }
  InterpolationKind kind() const { return kind_; }
  int m() const { return ref_.m; }
  int corners() const { return corners_; }
  int fineNodeCount() const { return static_cast<int>(freeIndex_.size()); }
  int fineElementCount() const { return static_cast<int>(elementNodes_.size()) / corners_; }
  int freeCount() const { return freeCount_; }
  int constraintCount() const { return static_cast<int>(constraints_.rows()); }
  int coarseNodeCount() const { return ref_.localCoarseNodes().size(); }

  /// Local fine nodes of local fine element e (corner order).
  const int* elementNodes(int e) const { return &elementNodes_[static_cast<std::size_t>(e) * corners_]; }
  /// Local coarse element containing local fine element e and the offset index of e inside it.
  int coarseElementOf(int e) const { return coarseOf_[static_cast<std::size_t>(e)]; }
  int offsetOf(int e) const { return offsetOf_[static_cast<std::size_t>(e)]; }
  /// Local coarse nodes of the corners of a local coarse element.
  const int* coarseCorners(int E) const { return &coarseCorners_[static_cast<std::size_t>(E) * corners_]; }
  /// Local index of the center element among the patch's coarse elements.
  int centerElement() const { return centerElement_; }
  const std::vector<int>& centerFineElements() const { return centerFine_; }
  bool inCenter(int e) const { return coarseOf_[static_cast<std::size_t>(e)] == centerElement_; }

  /// Hat values of corner c of the containing coarse element at node a of fine element e.
  double hat(int e, int a, int c) const { return hatsAtElement_(offsetOf(e) * corners_ + a, c); }
  const Mat& fineStiffness() const { return kref_; }
  const Mat& fineMass() const { return mref_; }

  const std::vector<int>& freeIndex() const { return freeIndex_; }
  const Eigen::SparseMatrix<double>& constraints() const { return constraints_; }
  const std::vector<int>& constraintNodes() const { return constraintNodes_; }
  /// Periodic patches pin one node; the pinned node and C*1 over all nodes.
  int pinnedNode() const { return pinned_; }
  const Vec& constraintOnes() const { return constraintOnes_; }

  const std::vector<int>& patternColPtr() const { return colPtr_; }
  const std::vector<int>& patternRowIdx() const { return rowIdx_; }
  /// Position in the pattern value array for the (a,b) element pair of element e, or -1.
  int scatter(int e, int a, int b) const {
    return scatter_[(static_cast<std::size_t>(e) * corners_ + a) * corners_ + b];
  }

  /// Stiffness values on the fixed pattern for an elementwise coefficient on the patch.
  std::vector<double> stiffnessValues(const CoefficientField& a) const;
  /// Right-hand sides (A grad lambda_j, grad v)_T on all local fine nodes.
  Mat loadMatrix(const CoefficientField& a) const;

 private:
  NestedMesh mesh_;
  PatchGeometry ref_;
  InterpolationKind kind_;
  int corners_ = 4;
  int freeCount_ = 0;
  int pinned_ = -1;
  int centerElement_ = 0;
  std::vector<int> freeIndex_;
  std::vector<int> elementNodes_;
  std::vector<int> coarseOf_;
  std::vector<int> offsetOf_;
  std::vector<int> coarseCorners_;
  std::vector<int> centerFine_;
  Mat hatsAtElement_;  // (offset, element corner) x coarse corner
  Mat kref_, mref_;
  Eigen::SparseMatrix<double> constraints_;
  std::vector<int> constraintNodes_;
  Vec constraintOnes_;
  std::vector<int> colPtr_, rowIdx_;
  std::vector<int> scatter_;
};

/// Owns a factorization object for the reference pattern; one per worker thread.
class CorrectorSolver {
 public:
  explicit CorrectorSolver(const PatchProblem& problem);
  ~CorrectorSolver();

  /// Throws Error(Solver) when the reciprocal condition estimate drops below 1e-14.
  CorrectorBasis solve(const CoefficientField& aPatch);
  double lastRcond() const { return rcond_; }

 private:
  const PatchProblem& problem_;
  std::unique_ptr<GridCholesky> grid_;      // box patches
  std::unique_ptr<CholmodFactor> factor_;  // patches covering the torus
  Mat ct_;  // dense C^T, reused as workspace
  double rcond_ = 0.0;
};

/// b_T(lambda_j, lambda_k): rows j over the corners of the center element,
/// columns k over the local coarse nodes of the patch.
Mat local_stiffness(const PatchProblem& problem, const CoefficientField& aPatch, const CorrectorBasis& corrector);

/// Largest absolute row sum of a local stiffness matrix.
double row_sum_check(const Mat& localStiffness);

}  // namespace randlod
