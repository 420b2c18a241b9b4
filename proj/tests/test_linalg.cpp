#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "randlod/error.hpp"
#include "randlod/linalg.hpp"

using namespace randlod;

namespace {

SparseMatrix from_dense(const Mat& a, bool symmetric) {
  TripletAccumulator acc(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      if (a(r, c) != 0.0) acc.add(r, c, a(r, c));
  return acc.finalize(symmetric);
}

Mat random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = g(rng);
  return x * x.transpose() + n * Mat::Identity(n, n);
}

// Largest root of det(S - nu B), scanning down from an upper bound and bisecting.
double largest_root(const Mat& S, const Mat& B) {
  auto f = [&](double nu) { return (S - nu * B).determinant(); };
  const double hi = 1.01 * S.norm() / Eigen::SelfAdjointEigenSolver<Mat>(B).eigenvalues().minCoeff() + 1.0;
  const int steps = 200000;
  double x = hi, fx = f(hi);
  for (int k = 1; k <= steps; ++k) {
    const double y = hi * (1.0 - static_cast<double>(k) / steps);
    const double fy = f(y);
    if ((fy > 0) != (fx > 0)) {
      double a = y, b = x;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if ((f(m) > 0) == (f(a) > 0)) a = m;
        else b = m;
      }
      return 0.5 * (a + b);
    }
    x = y;
    fx = fy;
  }
  return NAN;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("identity solve returns the right-hand side") {
    const SparseMatrix I = from_dense(Mat::Identity(6, 6), true);
    const Vec b = Vec::LinSpaced(6, -1.0, 2.0);
    for (SolveKind k : {SolveKind::Spd, SolveKind::SymmetricIndefinite, SolveKind::General})
      CHECK((sparse_solve(I, b, k).solution - b).norm() == doctest::Approx(0.0));
  }

  TEST_CASE("two by two saddle point") {
    Mat a(2, 2);
    a << 1, 1, 1, 0;
    const SolveReport r = sparse_solve(from_dense(a, true), Vec::Ones(2), SolveKind::SymmetricIndefinite);
    CHECK(r.solution[0] == doctest::Approx(1.0));
    CHECK(std::abs(r.solution[1]) < 1e-15);
    CHECK(r.relativeResidual <= 1e-12);
  }

  TEST_CASE("random SPD solve against a dense factorization") {
    std::mt19937_64 rng(4);
    const Mat a = random_spd(50, rng);
    const Vec b = Vec::Random(50);
    const Vec ref = a.llt().solve(b);
    for (SolveKind k : {SolveKind::Spd, SolveKind::General}) {
      const SolveReport r = sparse_solve(from_dense(a, true), b, k);
      CHECK((r.solution - ref).norm() / ref.norm() < 1e-10);
      CHECK(r.relativeResidual <= 1e-12);
    }
  }

  TEST_CASE("singular systems are reported") {
    Mat a = Mat::Zero(3, 3);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    CHECK_THROWS_AS(sparse_solve(from_dense(a, true), Vec::Ones(3), SolveKind::General), Error);
    CHECK_THROWS_AS(sparse_solve(from_dense(a, true), Vec::Ones(3), SolveKind::Spd), Error);
  }

  TEST_CASE("generalized eigenvalue trivial cases") {
    std::mt19937_64 rng(1);
    const Mat b = random_spd(3, rng);
    CHECK(gen_eig_max(b, b).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(gen_eig_max(Mat::Zero(3, 3), b).value) < 1e-12);
    Mat bad = Mat::Identity(3, 3);
    bad(2, 2) = -1.0;
    CHECK_THROWS_AS(gen_eig_max(b, bad), Error);
  }

  TEST_CASE("generalized eigenvalue matches the characteristic polynomial root") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
      const Mat s = random_spd(3, rng);
      const Mat b = random_spd(3, rng);
      const double ref = largest_root(s, b);
      CHECK(std::abs(gen_eig_max(s, b).value - ref) < 1e-10 * std::max(1.0, ref));
    }
  }

  TEST_CASE("element tables against quadrature") {
    for (int dim : {1, 2}) {
      const double h = 0.125;
      const oracle::Grid g{dim, 8, 1, 8};
      const auto pts = oracle::element_points(g, 0, 0, 3);
      const int n = dim == 2 ? 4 : 2;
      Mat k = Mat::Zero(n, n), m = Mat::Zero(n, n);
      for (const auto& p : pts)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            k(a, b) += p.w * (p.grad[a][0] * p.grad[b][0] + p.grad[a][1] * p.grad[b][1]);
            m(a, b) += p.w * p.val[a] * p.val[b];
          }
      CHECK((q1_stiffness(dim, h) - k).norm() < 1e-13);
      CHECK((q1_mass(dim, h) - m).norm() < 1e-15);
    }
  }

  TEST_CASE("triplet accumulation is ordered and drops cancellations") {
    TripletAccumulator acc(3, 3);
    acc.add(2, 1, 1.0);
    acc.add(0, 0, 2.0);
    acc.add(2, 1, 0.5);
    acc.add(1, 2, 1.0);
    acc.add(1, 2, -1.0);
    const SparseMatrix m = acc.finalize();
    CHECK(m.nonZeros() == 2);
    CHECK(m.coeff(2, 1) == 1.5);
    CHECK(m.coeff(1, 2) == 0.0);
    for (int r = 0; r < m.rows; ++r)
      for (int p = m.rowPtr[r] + 1; p < m.rowPtr[r + 1]; ++p) CHECK(m.colIdx[p - 1] < m.colIdx[p]);
  }

  TEST_CASE("grid Cholesky matches a dense solve") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (Index2 n : {Index2{7, 5}, Index2{13, 13}, Index2{21, 1}, Index2{30, 9}}) {
      const Box grid{n};
      // Random Q1-type SPD matrix: sum of positive weights times element stiffness.
      Mat a = Mat::Zero(grid.size(), grid.size());
      const Mat ke = q1_stiffness(n[1] == 1 ? 1 : 2, 1.0);
      const int corners = n[1] == 1 ? 2 : 4;
      for (int e1 = -1; e1 < std::max(1, n[1]); ++e1)
        for (int e0 = -1; e0 < n[0]; ++e0) {
          if (n[1] == 1 && e1 != 0) continue;
          const double w = u(rng);
          for (int p = 0; p < corners; ++p)
            for (int q = 0; q < corners; ++q) {
              const int p0 = e0 + (p & 1), p1 = n[1] == 1 ? 0 : e1 + (p >> 1);
              const int q0 = e0 + (q & 1), q1 = n[1] == 1 ? 0 : e1 + (q >> 1);
              if (p0 < 0 || p1 < 0 || q0 < 0 || q1 < 0 || p0 >= n[0] || q0 >= n[0] || p1 >= n[1] || q1 >= n[1]) continue;
              a(grid.index(p0, p1), grid.index(q0, q1)) += w * ke(p, q);
            }
        }
      std::vector<int> colPtr{0}, rowIdx;
      std::vector<double> vals;
      for (int c = 0; c < grid.size(); ++c) {
        for (int r = 0; r <= c; ++r)
          if (a(r, c) != 0.0) {
            rowIdx.push_back(r);
            vals.push_back(a(r, c));
          }
        colPtr.push_back(static_cast<int>(rowIdx.size()));
      }
      GridCholesky gc(grid, colPtr, rowIdx);
      const double rcond = gc.factorize(vals);
      CHECK(rcond > 0.0);
      Mat b = Mat::Random(grid.size(), 3);
      const Mat ref = a.llt().solve(b);
      gc.solve(b);
      CHECK((b - ref).norm() / ref.norm() < 1e-12);

      CholmodFactor cf(grid.size(), colPtr, rowIdx);
      cf.factorize(vals);
      Mat b2 = Mat::Random(grid.size(), 2);
      const Mat ref2 = a.llt().solve(b2);
      cf.solve(b2);
      CHECK((b2 - ref2).norm() / ref2.norm() < 1e-12);

      // Sparse right-hand sides: G^T G equals B^T A^{-1} B.
      Eigen::SparseMatrix<double> bs(grid.size(), 3);
      bs.insert(0, 0) = 1.0;
      bs.insert(grid.size() / 2, 1) = -2.0;
      bs.insert(grid.size() - 1, 2) = 0.5;
      bs.insert(1, 2) = 0.25;
      gc.setSparseRhs(bs);
      gc.forwardSparse();
      const Mat bd = Mat(bs);
      const Mat gram = bd.transpose() * a.llt().solve(bd);
      CHECK((gc.sparseGram() - gram).norm() / gram.norm() < 1e-12);
    }
  }

  TEST_CASE("grid Cholesky rejects indefinite matrices") {
    const Box grid{{4, 4}};
    std::vector<int> colPtr{0}, rowIdx;
    std::vector<double> vals;
    for (int c = 0; c < grid.size(); ++c) {
      rowIdx.push_back(c);
      vals.push_back(c == 5 ? -1.0 : 1.0);
      colPtr.push_back(static_cast<int>(rowIdx.size()));
    }
    GridCholesky gc(grid, colPtr, rowIdx);
    CHECK_THROWS_AS(gc.factorize(vals), Error);
  }
}
