#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "randlod/mesh.hpp"

namespace randlod {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Compressed-row sparse matrix with sorted column indices per row.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  bool symmetric = false;
  std::vector<int> rowPtr{0};
  std::vector<int> colIdx;
  std::vector<double> values;

  int nonZeros() const { return static_cast<int>(values.size()); }
  double coeff(int r, int c) const;
  Vec multiply(const Vec& x) const;
  Vec rowSums() const;
  Mat toDense() const;
  Eigen::SparseMatrix<double, Eigen::RowMajor> toEigen() const;
};

/// Collects (row, col, value) entries in insertion order. finalize() sums
/// duplicates in insertion order, so identical insertion sequences always
/// produce bit-identical matrices.
class TripletAccumulator {
 public:
  TripletAccumulator(int rows, int cols) : rows_(rows), cols_(cols) {}
  void add(int r, int c, double v) { entries_.push_back({r, c, v}); }
  void reserve(std::size_t n) { entries_.reserve(n); }
  SparseMatrix finalize(bool symmetric = false) const;

 private:
  struct Entry {
    int r, c;
    double v;
  };
  int rows_, cols_;
  std::vector<Entry> entries_;
};

enum class SolveKind { Spd, SymmetricIndefinite, General };

struct SolveReport {
  Vec solution;
  double relativeResidual = 0.0;
};

/// Direct solve with iterative refinement; throws Error(Solver) on breakdown.
SolveReport sparse_solve(const SparseMatrix& m, const Vec& rhs, SolveKind kind);

/// Supernodal Cholesky for a fixed sparsity pattern whose values change
/// between factorizations (symbolic analysis is done once).
class CholmodFactor {
 public:
  // Upper-triangular pattern in compressed-column form (row indices sorted).
  CholmodFactor(int n, std::vector<int> colPtr, std::vector<int> rowIdx);
  ~CholmodFactor();
  CholmodFactor(const CholmodFactor&) = delete;
  CholmodFactor& operator=(const CholmodFactor&) = delete;

  int size() const { return n_; }
  int patternNonZeros() const { return static_cast<int>(rowIdx_.size()); }
  const std::vector<int>& colPtr() const { return colPtr_; }
  const std::vector<int>& rowIdx() const { return rowIdx_; }
  const std::string& ordering() const { return ordering_; }

  /// Factorizes the matrix with the given values (aligned with rowIdx()).
  /// Returns the reciprocal condition estimate.
  double factorize(std::span<const double> values);
  /// In-place solve for each column of rhs.
  void solve(Mat& rhs) const;

 private:
  struct Impl;
  int n_;
  std::vector<int> colPtr_;
  std::vector<int> rowIdx_;
  std::string ordering_;
  std::unique_ptr<Impl> impl_;
};

/// Nested-dissection multifrontal Cholesky for SPD matrices whose graph lives
/// on a rectangular node grid, with couplings only between nodes at most one
/// step apart per axis (Q1 stencils). Matrix index of node (i0,i1) is
/// grid.index(i0,i1). Fronts are dense and factored with Eigen kernels.
class GridCholesky {
 public:
  GridCholesky(Box grid, const std::vector<int>& colPtr, const std::vector<int>& rowIdx);
  ~GridCholesky();
  GridCholesky(const GridCholesky&) = delete;
  GridCholesky& operator=(const GridCholesky&) = delete;

  int size() const { return grid_.size(); }
  /// Returns min(diag L)^2 / max(diag L)^2; throws Error(Solver) if not SPD.
  double factorize(std::span<const double> values);
  void solve(Mat& rhs) const;
  /// rhs := L^{-1} P rhs, stored at the original indices.
  void forward(Mat& rhs) const;
  /// rhs := P^T L^{-T} rhs.
  void backward(Mat& rhs) const;
  /// Floating point operations of one numeric factorization.
  double factorFlops() const;

  /// Sparse right-hand sides B (n x k) with a fixed pattern. forwardSparse()
  /// forms G = L^{-1} P B touching only the fronts above each column's support.
  void setSparseRhs(const Eigen::SparseMatrix<double>& b);
  void forwardSparse();
  /// G^T G (k x k).
  Mat sparseGram() const;
  /// G^T z for z = L^{-1} P r stored at original indices (n x m).
  Mat sparseTransposeTimes(const Mat& z) const;
  /// z -= G y.
  void sparseSubtract(Mat& z, const Mat& y) const;

 private:
  struct Front;
  Box grid_;
  std::vector<Front> fronts_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> rhs_;
  int rhsCols_ = 0;
  bool factored_ = false;
};

struct GenEig {
  double value = 0.0;
  Vec vector;
};

/// Largest eigenpair of S v = nu B v for symmetric S and SPD B (small sizes).
GenEig gen_eig_max(const Mat& S, const Mat& B);

/// Tensor-product Q1 element matrices on a cube of side h (node order x-fastest).
Mat q1_stiffness(int dim, double h);
Mat q1_mass(int dim, double h);

}  // namespace randlod
