#include "randlod/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdlib>
#include <array>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <suitesparse/cholmod.h>

#include "randlod/error.hpp"

namespace randlod {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Solver: return "solver failure";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Capability: return "capability error";
    case ErrorKind::Unsupported: return "unsupported combination";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Version: return "version error";
    case ErrorKind::Checksum: return "checksum error";
    case ErrorKind::Truncated: return "truncated file";
  }
  return "unknown error";
}

double SparseMatrix::coeff(int r, int c) const {
  auto first = colIdx.begin() + rowPtr[r];
  auto last = colIdx.begin() + rowPtr[r + 1];
  auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - colIdx.begin())];
}

Vec SparseMatrix::multiply(const Vec& x) const {
  Vec y = Vec::Zero(rows);
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int p = rowPtr[r]; p < rowPtr[r + 1]; ++p) s += values[p] * x[colIdx[p]];
    y[r] = s;
  }
  return y;
}

Vec SparseMatrix::rowSums() const {
  Vec s = Vec::Zero(rows);
  for (int r = 0; r < rows; ++r)
    for (int p = rowPtr[r]; p < rowPtr[r + 1]; ++p) s[r] += values[p];
  return s;
}

Mat SparseMatrix::toDense() const {
  Mat d = Mat::Zero(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int p = rowPtr[r]; p < rowPtr[r + 1]; ++p) d(r, colIdx[p]) = values[p];
  return d;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> SparseMatrix::toEigen() const {
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(rows, cols);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(values.size());
  for (int r = 0; r < rows; ++r)
    for (int p = rowPtr[r]; p < rowPtr[r + 1]; ++p) t.emplace_back(r, colIdx[p], values[p]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix TripletAccumulator::finalize(bool symmetric) const {
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = entries_[a];
    const auto& eb = entries_[b];
    return ea.r != eb.r ? ea.r < eb.r : ea.c < eb.c;
  });

  SparseMatrix m;
  m.rows = rows_;
  m.cols = cols_;
  m.symmetric = symmetric;
  m.rowPtr.assign(static_cast<std::size_t>(rows_) + 1, 0);
  std::size_t i = 0;
  while (i < order.size()) {
    const auto& head = entries_[order[i]];
    double sum = 0.0;
    std::size_t j = i;
    while (j < order.size() && entries_[order[j]].r == head.r && entries_[order[j]].c == head.c) {
      sum += entries_[order[j]].v;
      ++j;
    }
    if (sum != 0.0) {
      m.colIdx.push_back(head.c);
      m.values.push_back(sum);
      ++m.rowPtr[static_cast<std::size_t>(head.r) + 1];
    }
    i = j;
  }
  for (int r = 0; r < rows_; ++r) m.rowPtr[r + 1] += m.rowPtr[r];
  return m;
}

// ---------------------------------------------------------------------------
// CHOLMOD wrapper

struct CholmodFactor::Impl {
  cholmod_common common{};
  cholmod_sparse* matrix = nullptr;
  cholmod_factor* factor = nullptr;
  bool factored = false;
};

CholmodFactor::CholmodFactor(int n, std::vector<int> colPtr, std::vector<int> rowIdx)
    : n_(n), colPtr_(std::move(colPtr)), rowIdx_(std::move(rowIdx)), impl_(std::make_unique<Impl>()) {
  auto& c = impl_->common;
  cholmod_start(&c);
  c.print = 0;
  c.nmethods = 1;
  c.method[0].ordering = CHOLMOD_AMD;
  c.postorder = 1;
  // the supernodal path goes through the system BLAS, whose AVX-512 kernels
  // return wrong factors on some hosts; the simplicial path needs no BLAS
  c.supernodal = CHOLMOD_SIMPLICIAL;
  ordering_ = "amd";
  if (n_ == 0) return;

  impl_->matrix = cholmod_allocate_sparse(n_, n_, rowIdx_.size(), 1, 1, 1, CHOLMOD_REAL, &c);
  if (!impl_->matrix) fail(ErrorKind::Solver, "cholmod: allocation failed");
  std::memcpy(impl_->matrix->p, colPtr_.data(), colPtr_.size() * sizeof(int));
  std::memcpy(impl_->matrix->i, rowIdx_.data(), rowIdx_.size() * sizeof(int));
  std::fill_n(static_cast<double*>(impl_->matrix->x), rowIdx_.size(), 0.0);
  impl_->factor = cholmod_analyze(impl_->matrix, &c);
  if (!impl_->factor) fail(ErrorKind::Solver, "cholmod: symbolic analysis failed");
}

CholmodFactor::~CholmodFactor() {
  if (!impl_) return;
  auto& c = impl_->common;
  if (impl_->factor) cholmod_free_factor(&impl_->factor, &c);
  if (impl_->matrix) cholmod_free_sparse(&impl_->matrix, &c);
  cholmod_finish(&c);
}

double CholmodFactor::factorize(std::span<const double> values) {
  if (n_ == 0) return 1.0;
  if (values.size() != rowIdx_.size()) fail(ErrorKind::Data, "cholmod: value count does not match pattern");
  auto& c = impl_->common;
  std::memcpy(impl_->matrix->x, values.data(), values.size() * sizeof(double));
  cholmod_factorize(impl_->matrix, impl_->factor, &c);
  if (c.status == CHOLMOD_NOT_POSDEF)
    fail(ErrorKind::Solver, "cholmod: matrix not positive definite (column " +
                                std::to_string(impl_->factor->minor) + ")");
  if (c.status < CHOLMOD_OK) fail(ErrorKind::Solver, "cholmod: factorization failed");
  impl_->factored = true;
  return cholmod_rcond(impl_->factor, &c);
}

void CholmodFactor::solve(Mat& rhs) const {
  if (n_ == 0 || rhs.cols() == 0) return;
  if (!impl_->factored) fail(ErrorKind::Solver, "cholmod: solve before factorize");
  if (rhs.rows() != n_) fail(ErrorKind::Data, "cholmod: right-hand side has wrong size");
  cholmod_dense b{};
  b.nrow = static_cast<std::size_t>(n_);
  b.ncol = static_cast<std::size_t>(rhs.cols());
  b.nzmax = b.nrow * b.ncol;
  b.d = b.nrow;
  b.x = rhs.data();
  b.xtype = CHOLMOD_REAL;
  b.dtype = CHOLMOD_DOUBLE;
  auto& c = impl_->common;
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, impl_->factor, &b, &c);
  if (!x) fail(ErrorKind::Solver, "cholmod: triangular solve failed");
  std::memcpy(rhs.data(), x->x, b.nzmax * sizeof(double));
  cholmod_free_dense(&x, &c);
}

// ---------------------------------------------------------------------------

namespace {

double relative_residual(const SparseMatrix& m, const Vec& x, const Vec& rhs) {
  const double denom = std::max(rhs.norm(), 1e-300);
  return (rhs - m.multiply(x)).norm() / denom;
}

}  // namespace

SolveReport sparse_solve(const SparseMatrix& m, const Vec& rhs, SolveKind kind) {
  if (m.rows != m.cols) fail(ErrorKind::Data, "sparse_solve: matrix is not square");
  if (rhs.size() != m.rows) fail(ErrorKind::Data, "sparse_solve: right-hand side has wrong size");
  SolveReport report;
  if (rhs.norm() == 0.0) {
    report.solution = Vec::Zero(m.rows);
    return report;
  }

  std::function<Vec(const Vec&)> apply;
  std::unique_ptr<CholmodFactor> chol;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;

  if (kind == SolveKind::Spd) {
    // CSR row j restricted to columns <= j equals CSC column j of the upper triangle.
    std::vector<int> colPtr{0}, rowIdx;
    std::vector<double> vals;
    for (int r = 0; r < m.rows; ++r) {
      for (int p = m.rowPtr[r]; p < m.rowPtr[r + 1]; ++p) {
        if (m.colIdx[p] > r) break;
        rowIdx.push_back(m.colIdx[p]);
        vals.push_back(m.values[p]);
      }
      colPtr.push_back(static_cast<int>(rowIdx.size()));
    }
    chol = std::make_unique<CholmodFactor>(m.rows, std::move(colPtr), std::move(rowIdx));
    const double rcond = chol->factorize(vals);
    if (rcond < 1e-14) fail(ErrorKind::Solver, "sparse_solve: reciprocal condition estimate " + std::to_string(rcond));
    apply = [&](const Vec& b) {
      Mat x = b;
      chol->solve(x);
      return Vec(x.col(0));
    };
  } else {
    Eigen::SparseMatrix<double> a = m.toEigen();
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
      fail(ErrorKind::Solver, "sparse_solve: LU breakdown: " + lu.lastErrorMessage());
    apply = [&](const Vec& b) { return Vec(lu.solve(b)); };
  }

  Vec x = apply(rhs);
  double res = relative_residual(m, x, rhs);
  for (int it = 0; it < 3 && res > 1e-15; ++it) {
    Vec r = rhs - m.multiply(x);
    Vec xn = x + apply(r);
    const double rn = relative_residual(m, xn, rhs);
    if (!(rn < res)) break;
    x = std::move(xn);
    res = rn;
  }
  if (!std::isfinite(res) || res > 1e-9)
    fail(ErrorKind::Solver, "sparse_solve: residual stagnation at relative residual " + std::to_string(res));
  report.solution = std::move(x);
  report.relativeResidual = res;
  return report;
}

GenEig gen_eig_max(const Mat& S, const Mat& B) {
  if (S.rows() != S.cols() || B.rows() != B.cols() || S.rows() != B.rows())
    fail(ErrorKind::Data, "gen_eig_max: dimension mismatch");
  GenEig out;
  if (S.rows() == 0) return out;
  Eigen::LLT<Mat> llt(B);
  if (llt.info() != Eigen::Success) fail(ErrorKind::Numeric, "gen_eig_max: B is not positive definite");
  Mat Ssym = 0.5 * (S + S.transpose());
  Mat Bsym = 0.5 * (B + B.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Ssym, Bsym, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) fail(ErrorKind::Numeric, "gen_eig_max: eigen solver did not converge");
  const auto last = S.rows() - 1;
  out.value = es.eigenvalues()[last];
  out.vector = es.eigenvectors().col(last);
  return out;
}

namespace {

Mat kron(const Mat& a, const Mat& b) {
  // Index (i0 + 2*i1): the first factor acts on the x-axis (fastest).
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i1 = 0; i1 < b.rows(); ++i1)
    for (int j1 = 0; j1 < b.cols(); ++j1)
      for (int i0 = 0; i0 < a.rows(); ++i0)
        for (int j0 = 0; j0 < a.cols(); ++j0)
          out(i0 + a.rows() * i1, j0 + a.cols() * j1) = a(i0, j0) * b(i1, j1);
  return out;
}

Mat stiffness1d(double h) { return (Mat(2, 2) << 1.0, -1.0, -1.0, 1.0).finished() / h; }
Mat mass1d(double h) { return (Mat(2, 2) << 2.0, 1.0, 1.0, 2.0).finished() * (h / 6.0); }

}  // namespace

Mat q1_stiffness(int dim, double h) {
  if (dim == 1) return stiffness1d(h);
  return kron(stiffness1d(h), mass1d(h)) + kron(mass1d(h), stiffness1d(h));
}

Mat q1_mass(int dim, double h) {
  if (dim == 1) return mass1d(h);
  return kron(mass1d(h), mass1d(h));
}

}  // namespace randlod

namespace randlod {

// ---------------------------------------------------------------------------
// Grid multifrontal Cholesky



struct GridCholesky::Front {
  std::vector<int> elim;  // matrix indices eliminated here, in elimination order
  std::vector<int> bnd;   // later-eliminated neighbours, by elimination position
  std::vector<int> children;
  std::vector<std::vector<int>> childMap;  // child bnd index -> local front index
  std::vector<std::array<int, 3>> assembly;  // (value position, local row, local col)
  Mat l11, l21;
  std::vector<int> cols;  // sparse right-hand side columns reaching this front
  Mat g;                  // rows elim x cols of L^{-1} P B
};

namespace {

struct Rect {
  int x0, x1, y0, y1;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  int area() const { return width() * height(); }
};

}  // namespace

GridCholesky::GridCholesky(Box grid, const std::vector<int>& colPtr, const std::vector<int>& rowIdx) : grid_(grid) {
  const int n = grid.size();
  if (static_cast<int>(colPtr.size()) != n + 1) fail(ErrorKind::Data, "grid cholesky: pattern size mismatch");
  std::vector<int> frontOf(static_cast<std::size_t>(n), -1);

  std::function<int(Rect)> build = [&](Rect r) -> int {
    Front f;
    std::vector<int> kids;
    if (r.area() <= 16) {
      for (int j = r.y0; j < r.y1; ++j)
        for (int i = r.x0; i < r.x1; ++i) f.elim.push_back(grid.index(i, j));
    } else if (r.width() >= r.height()) {
      const int xs = r.x0 + r.width() / 2;
      for (Rect c : {Rect{r.x0, xs, r.y0, r.y1}, Rect{xs + 1, r.x1, r.y0, r.y1}})
        if (c.area() > 0) kids.push_back(build(c));
      for (int j = r.y0; j < r.y1; ++j) f.elim.push_back(grid.index(xs, j));
    } else {
      const int ys = r.y0 + r.height() / 2;
      for (Rect c : {Rect{r.x0, r.x1, r.y0, ys}, Rect{r.x0, r.x1, ys + 1, r.y1}})
        if (c.area() > 0) kids.push_back(build(c));
      for (int i = r.x0; i < r.x1; ++i) f.elim.push_back(grid.index(i, ys));
    }
    // ring of the rectangle: all later-eliminated neighbours
    for (int j = std::max(r.y0 - 1, 0); j <= std::min(r.y1, grid.n[1] - 1); ++j)
      for (int i = std::max(r.x0 - 1, 0); i <= std::min(r.x1, grid.n[0] - 1); ++i)
        if (i < r.x0 || i >= r.x1 || j < r.y0 || j >= r.y1) f.bnd.push_back(grid.index(i, j));
    f.children = std::move(kids);
    fronts_.push_back(std::move(f));
    const int id = static_cast<int>(fronts_.size()) - 1;
    for (int v : fronts_.back().elim) frontOf[static_cast<std::size_t>(v)] = id;
    return id;
  };
  if (n > 0) build(Rect{0, grid.n[0], 0, grid.n[1]});

  std::vector<int> pos(static_cast<std::size_t>(n));
  int next = 0;
  for (const Front& f : fronts_)
    for (int v : f.elim) pos[static_cast<std::size_t>(v)] = next++;
  for (Front& f : fronts_)
    std::sort(f.bnd.begin(), f.bnd.end(), [&](int a, int b) { return pos[a] < pos[b]; });

  std::vector<int> local(static_cast<std::size_t>(n), -1);
  auto mark = [&](const Front& f, int value) {
    for (std::size_t k = 0; k < f.elim.size(); ++k) local[static_cast<std::size_t>(f.elim[k])] = value < 0 ? -1 : int(k);
    for (std::size_t k = 0; k < f.bnd.size(); ++k)
      local[static_cast<std::size_t>(f.bnd[k])] = value < 0 ? -1 : int(f.elim.size() + k);
  };
  for (Front& f : fronts_) {
    mark(f, 1);
    for (int c : f.children) {
      std::vector<int> map;
      for (int v : fronts_[static_cast<std::size_t>(c)].bnd) {
        const int l = local[static_cast<std::size_t>(v)];
        if (l < 0) fail(ErrorKind::Solver, "grid cholesky: child boundary outside parent front");
        map.push_back(l);
      }
      f.childMap.push_back(std::move(map));
    }
    mark(f, -1);
  }
  // each stored entry goes to the front that eliminates its earlier endpoint
  std::vector<std::vector<std::array<int, 3>>> lists(fronts_.size());
  for (int j = 0; j < n; ++j)
    for (int p = colPtr[static_cast<std::size_t>(j)]; p < colPtr[static_cast<std::size_t>(j) + 1]; ++p) {
      const int i = rowIdx[static_cast<std::size_t>(p)];
      const int first = pos[static_cast<std::size_t>(i)] <= pos[static_cast<std::size_t>(j)] ? i : j;
      lists[static_cast<std::size_t>(frontOf[static_cast<std::size_t>(first)])].push_back({p, i, j});
    }
  for (std::size_t fi = 0; fi < fronts_.size(); ++fi) {
    Front& f = fronts_[fi];
    mark(f, 1);
    for (auto [p, i, j] : lists[fi]) {
      const int li = local[static_cast<std::size_t>(i)], lj = local[static_cast<std::size_t>(j)];
      if (li < 0 || lj < 0) fail(ErrorKind::Solver, "grid cholesky: coupling outside the stencil");
      f.assembly.push_back({p, std::max(li, lj), std::min(li, lj)});
    }
    mark(f, -1);
  }
}

GridCholesky::~GridCholesky() = default;

double GridCholesky::factorFlops() const {
  double fl = 0.0;
  for (const Front& f : fronts_) {
    const double e = static_cast<double>(f.elim.size()), b = static_cast<double>(f.bnd.size());
    fl += e * e * e / 3.0 + e * e * b + e * b * b;
  }
  return fl;
}

double GridCholesky::factorize(std::span<const double> values) {
  std::vector<Mat> updates(fronts_.size());
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (std::size_t fi = 0; fi < fronts_.size(); ++fi) {
    Front& f = fronts_[fi];
    const int e = static_cast<int>(f.elim.size()), b = static_cast<int>(f.bnd.size());
    Mat front = Mat::Zero(e + b, e + b);  // lower triangle is used
    for (auto [p, li, lj] : f.assembly) front(li, lj) += values[static_cast<std::size_t>(p)];
    for (std::size_t c = 0; c < f.children.size(); ++c) {
      Mat& u = updates[static_cast<std::size_t>(f.children[c])];
      const auto& map = f.childMap[c];
      for (int cj = 0; cj < u.cols(); ++cj)
        for (int ci = cj; ci < u.rows(); ++ci) front(map[ci], map[cj]) += u(ci, cj);
      u.resize(0, 0);
    }
    Eigen::Ref<Mat> top = front.topLeftCorner(e, e);
    Eigen::LLT<Eigen::Ref<Mat>> llt(top);
    if (llt.info() != Eigen::Success)
      fail(ErrorKind::Solver, "grid cholesky: matrix not positive definite (front " + std::to_string(fi) + ")");
    f.l11 = front.topLeftCorner(e, e).triangularView<Eigen::Lower>();
    for (int k = 0; k < e; ++k) {
      dmin = std::min(dmin, f.l11(k, k));
      dmax = std::max(dmax, f.l11(k, k));
    }
    if (b > 0) {
      f.l21 = front.bottomLeftCorner(b, e);
      f.l11.triangularView<Eigen::Lower>().transpose().solveInPlace<Eigen::OnTheRight>(f.l21);
      Mat u = front.bottomRightCorner(b, b);
      u.triangularView<Eigen::Lower>() -= f.l21 * f.l21.transpose();
      updates[fi] = std::move(u);
    } else {
      f.l21.resize(0, e);
    }
  }
  factored_ = true;
  return fronts_.empty() ? 1.0 : (dmin / dmax) * (dmin / dmax);
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

void GridCholesky::forward(Mat& x) const {
  if (!factored_) fail(ErrorKind::Solver, "grid cholesky: solve before factorize");
  RowMat y = x;  // rows are gathered per front, so keep them contiguous
  RowMat ye, yb;
  for (const Front& f : fronts_) {
    const int e = static_cast<int>(f.elim.size()), b = static_cast<int>(f.bnd.size());
    ye.resize(e, y.cols());
    for (int i = 0; i < e; ++i) ye.row(i) = y.row(f.elim[static_cast<std::size_t>(i)]);
    f.l11.triangularView<Eigen::Lower>().solveInPlace(ye);
    for (int i = 0; i < e; ++i) y.row(f.elim[static_cast<std::size_t>(i)]) = ye.row(i);
    if (b == 0) continue;
    yb.noalias() = f.l21 * ye;
    for (int i = 0; i < b; ++i) y.row(f.bnd[static_cast<std::size_t>(i)]) -= yb.row(i);
  }
  x = y;
}

void GridCholesky::backward(Mat& x) const {
  if (!factored_) fail(ErrorKind::Solver, "grid cholesky: solve before factorize");
  RowMat y = x;
  RowMat ye, yb;
  for (auto it = fronts_.rbegin(); it != fronts_.rend(); ++it) {
    const Front& f = *it;
    const int e = static_cast<int>(f.elim.size()), b = static_cast<int>(f.bnd.size());
    ye.resize(e, y.cols());
    for (int i = 0; i < e; ++i) ye.row(i) = y.row(f.elim[static_cast<std::size_t>(i)]);
    if (b > 0) {
      yb.resize(b, y.cols());
      for (int i = 0; i < b; ++i) yb.row(i) = y.row(f.bnd[static_cast<std::size_t>(i)]);
      ye.noalias() -= f.l21.transpose() * yb;
    }
    f.l11.triangularView<Eigen::Lower>().transpose().solveInPlace(ye);
    for (int i = 0; i < e; ++i) y.row(f.elim[static_cast<std::size_t>(i)]) = ye.row(i);
  }
  x = y;
}

void GridCholesky::setSparseRhs(const Eigen::SparseMatrix<double>& b) {
  if (b.rows() != size()) fail(ErrorKind::Data, "grid cholesky: sparse right-hand side has wrong size");
  rhs_ = b;
  rhsCols_ = static_cast<int>(b.cols());
  // position of each front's parent is implied by postorder; propagate column sets upward
  std::vector<int> parent(fronts_.size(), -1);
  for (std::size_t f = 0; f < fronts_.size(); ++f)
    for (int c : fronts_[f].children) parent[static_cast<std::size_t>(c)] = static_cast<int>(f);
  std::vector<std::vector<int>> sets(fronts_.size());
  for (std::size_t f = 0; f < fronts_.size(); ++f) {
    auto& set = sets[f];
    for (int v : fronts_[f].elim)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rhs_, v); it; ++it) set.push_back(int(it.col()));
    for (int c : fronts_[f].children) set.insert(set.end(), sets[static_cast<std::size_t>(c)].begin(), sets[static_cast<std::size_t>(c)].end());
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    fronts_[f].cols = set;
  }
}

void GridCholesky::forwardSparse() {
  if (!factored_) fail(ErrorKind::Solver, "grid cholesky: solve before factorize");
  RowMat y = RowMat::Zero(size(), rhsCols_);
  for (int r = 0; r < rhs_.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rhs_, r); it; ++it) y(r, it.col()) = it.value();
  Mat yb;
  for (Front& f : fronts_) {
    const int e = static_cast<int>(f.elim.size()), b = static_cast<int>(f.bnd.size());
    const int k = static_cast<int>(f.cols.size());
    f.g.resize(e, k);
    if (k == 0) continue;
    for (int i = 0; i < e; ++i)
      for (int j = 0; j < k; ++j) f.g(i, j) = y(f.elim[static_cast<std::size_t>(i)], f.cols[static_cast<std::size_t>(j)]);
    f.l11.triangularView<Eigen::Lower>().solveInPlace(f.g);
    if (b == 0) continue;
    yb.noalias() = f.l21 * f.g;
    for (int i = 0; i < b; ++i) {
      double* row = &y(f.bnd[static_cast<std::size_t>(i)], 0);
      for (int j = 0; j < k; ++j) row[f.cols[static_cast<std::size_t>(j)]] -= yb(i, j);
    }
  }
}

Mat GridCholesky::sparseGram() const {
  Mat s = Mat::Zero(rhsCols_, rhsCols_);
  Mat local;
  for (const Front& f : fronts_) {
    const int k = static_cast<int>(f.cols.size());
    if (k == 0 || f.g.rows() == 0) continue;
    local.noalias() = f.g.transpose() * f.g;
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < k; ++i) s(f.cols[static_cast<std::size_t>(i)], f.cols[static_cast<std::size_t>(j)]) += local(i, j);
  }
  return s;
}

Mat GridCholesky::sparseTransposeTimes(const Mat& z) const {
  Mat out = Mat::Zero(rhsCols_, z.cols());
  Mat ze, local;
  for (const Front& f : fronts_) {
    const int e = static_cast<int>(f.elim.size()), k = static_cast<int>(f.cols.size());
    if (k == 0 || e == 0) continue;
    ze.resize(e, z.cols());
    for (int i = 0; i < e; ++i) ze.row(i) = z.row(f.elim[static_cast<std::size_t>(i)]);
    local.noalias() = f.g.transpose() * ze;
    for (int i = 0; i < k; ++i) out.row(f.cols[static_cast<std::size_t>(i)]) += local.row(i);
  }
  return out;
}

void GridCholesky::sparseSubtract(Mat& z, const Mat& y) const {
  Mat yc, local;
  for (const Front& f : fronts_) {
    const int e = static_cast<int>(f.elim.size()), k = static_cast<int>(f.cols.size());
    if (k == 0 || e == 0) continue;
    yc.resize(k, y.cols());
    for (int i = 0; i < k; ++i) yc.row(i) = y.row(f.cols[static_cast<std::size_t>(i)]);
    local.noalias() = f.g * yc;
    for (int i = 0; i < e; ++i) z.row(f.elim[static_cast<std::size_t>(i)]) -= local.row(i);
  }
}

void GridCholesky::solve(Mat& x) const {
  forward(x);
  backward(x);
}

}  // namespace randlod
