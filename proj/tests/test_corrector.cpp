#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "randlod/coefficient.hpp"
#include "randlod/corrector.hpp"
#include "randlod/error.hpp"

using namespace randlod;

namespace {

PeriodicModel checkerboard(int dim, double p, int finePerCell = 1) {
  PeriodicModel m = checkerboard_model(dim, 0.1, 1.0, finePerCell);
  m.p = p;
  return m;
}

// Library corrector of patch T as global fine vectors.
Mat global_corrector(const NestedMesh& mesh, const PatchGeometry& p, const Mat& local) {
  Mat out = Mat::Zero(mesh.fineCount(), local.cols());
  for (std::size_t q = 0; q < p.fineNodes.size(); ++q) out.row(p.fineNodes[q]) += local.row(static_cast<Eigen::Index>(q));
  return out;
}

Mat global_columns(const NestedMesh& mesh, const PatchGeometry& p, const Mat& b) {
  Mat out = Mat::Zero(b.rows(), mesh.coarseCount());
  for (std::size_t k = 0; k < p.coarseNodes.size(); ++k) out.col(p.coarseNodes[k]) += b.col(static_cast<Eigen::Index>(k));
  return out;
}

}  // namespace

TEST_SUITE("corrector") {
  TEST_CASE("constant coefficient in 1D with m = 0 has no correction") {
    const NestedMesh mesh = build_mesh(1, 4, 8, 4);
    for (auto kind : {InterpolationKind::Nodal1d, InterpolationKind::AveragedL2}) {
      const PatchProblem prob(mesh, 0, kind);
      CorrectorSolver solver(prob);
      CoefficientField a;
      a.values.assign(static_cast<std::size_t>(prob.fineElementCount()), 3.0);
      const CorrectorBasis c = solver.solve(a);
      CHECK(c.values.cwiseAbs().maxCoeff() < 1e-13);
      const Mat b = local_stiffness(prob, a, c);
      Mat ref(2, 2);
      ref << 3.0, -3.0, -3.0, 3.0;
      CHECK((b - ref * mesh.nH).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(row_sum_check(b) < 1e-12);
    }
  }

  TEST_CASE("nodal 1D correctors reproduce the harmonic mean") {
    const NestedMesh mesh = build_mesh(1, 4, 16, 8);
    PeriodicModel m = checkerboard(1, 0.5, 8);
    const DefectSample s = sample_defects(m, mesh, 2, 0);
    const CoefficientField a = realize(m, s, mesh);
    const PatchProblem prob(mesh, 0, InterpolationKind::Nodal1d);
    CorrectorSolver solver(prob);
    for (int T = 0; T < mesh.coarseCount(); ++T) {
      const PatchGeometry p = patch(mesh, T, 0);
      const CoefficientField ap = restrict_to_patch(a, p);
      double inv = 0.0;
      for (double v : ap.values) inv += mesh.h() / v;
      const double harm = mesh.H() / inv;
      const Mat b = local_stiffness(prob, ap, solver.solve(ap));
      Mat ref(2, 2);
      ref << 1.0, -1.0, -1.0, 1.0;
      CHECK((b - ref * harm / mesh.H()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("dense oracle on the tiny instance") {
    const NestedMesh mesh = build_mesh(2, 4, 2, 4);
    const oracle::Grid g = oracle::grid_of(mesh);
    const PeriodicModel m = checkerboard(2, 0.5, 2);
    const CoefficientField a = realize(m, sample_defects(m, mesh, 8, 1), mesh);
    const Mat K = oracle::stiffness(g, a.values);
    const Mat P = oracle::coarse_hats(g);
    const Mat I = oracle::interpolation(g);
    for (int mm : {1, 2}) {
      CAPTURE(mm);
      const PatchProblem prob(mesh, mm, InterpolationKind::AveragedL2);
      CorrectorSolver solver(prob);
      for (int T : {0, 6, 15}) {
        CAPTURE(T);
        const PatchGeometry p = patch(mesh, T, mm);
        const CoefficientField ap = restrict_to_patch(a, p);
        const CorrectorBasis c = solver.solve(ap);
        const Mat Q = global_corrector(mesh, p, c.values);

        CHECK((Q - oracle::correctors(g, a.values, T, mm)).cwiseAbs().maxCoeff() < 1e-10);
        const Mat b = global_columns(mesh, p, local_stiffness(prob, ap, c));
        CHECK((b - oracle::local_stiffness(g, a.values, T, mm)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(row_sum_check(local_stiffness(prob, ap, c)) < 1e-12);

        // Constraints hold and the Galerkin residual vanishes on ker I_H.
        CHECK((I * Q).cwiseAbs().maxCoeff() < 1e-12);
        const oracle::PatchNodes pn = oracle::patch_nodes(g, T, mm);
        std::vector<char> isFree(static_cast<std::size_t>(mesh.fineCount()), 0);
        for (int f : pn.free) isFree[static_cast<std::size_t>(f)] = 1;
        for (int f = 0; f < mesh.fineCount(); ++f)
          if (!isFree[static_cast<std::size_t>(f)]) CHECK(Q.row(f).cwiseAbs().maxCoeff() == 0.0);
        Mat C(I.rows(), static_cast<Eigen::Index>(pn.free.size()));
        for (std::size_t k = 0; k < pn.free.size(); ++k) C.col(static_cast<Eigen::Index>(k)) = I.col(pn.free[k]);
        Eigen::FullPivLU<Mat> lu(C);
        const Mat Z = lu.kernel();
        const Mat KT = oracle::stiffness(g, a.values, &pn.centerMask);
        for (int j = 0; j < 4; ++j) {
          const Vec lam = P.col(g.cnode(T % 4 + (j & 1), T / 4 + (j >> 1)));
          const Vec r = K * Q.col(j) - KT * lam;
          Vec rf(static_cast<Eigen::Index>(pn.free.size()));
          for (std::size_t k = 0; k < pn.free.size(); ++k) rf[static_cast<Eigen::Index>(k)] = r[pn.free[k]];
          CHECK((Z.transpose() * rf).cwiseAbs().maxCoeff() < 1e-10);
          // Energy stability of the constrained projection.
          const double eq = Q.col(j).dot(K * Q.col(j));
          const double el = lam.dot(KT * lam);
          CHECK(std::sqrt(eq) <= std::sqrt(m.beta / m.alpha) * std::sqrt(el) * (1 + 1e-12));
        }
      }
    }
  }

  TEST_CASE("periodic coefficient gives the same matrix on every element") {
    const PeriodicModel inc = inclusion_model(2, 1.0, 10.0, 4);
    const NestedMesh m4 = build_mesh(2, 8, 8, 16);
    const CoefficientField a = realize(inc, sample_defects(inc, m4, 0, 0), m4);
    const PatchProblem prob(m4, 1, InterpolationKind::AveragedL2);
    CorrectorSolver solver(prob);
    const CoefficientField a0 = restrict_to_patch(a, patch(m4, 0, 1));
    const Mat b0 = local_stiffness(prob, a0, solver.solve(a0));
    for (int T : {1, 9, 27, 63}) {
      const CoefficientField aT = restrict_to_patch(a, patch(m4, T, 1));
      CHECK(aT.values == a0.values);
      CHECK(local_stiffness(prob, aT, solver.solve(aT)) == b0);
    }
  }

  TEST_CASE("row sum check detects perturbations") {
    Mat b(2, 3);
    b << 1.0, -0.5, -0.5, -1.0, 2.0, -1.0;
    CHECK(row_sum_check(b) == 0.0);
    b(1, 2) += 1e-6;
    CHECK(row_sum_check(b) >= 1e-6);
  }

  TEST_CASE("zero coarse function has zero correction") {
    const NestedMesh mesh = build_mesh(2, 4, 2, 4);
    const PatchProblem prob(mesh, 1, InterpolationKind::AveragedL2);
    CorrectorSolver solver(prob);
    CoefficientField a;
    a.values.assign(static_cast<std::size_t>(prob.fineElementCount()), 1.0);
    const CorrectorBasis c = solver.solve(a);
    CHECK((c.values * Vec::Zero(4)).norm() == 0.0);
  }

  TEST_CASE("degenerate coefficients trigger the condition diagnostic") {
    const NestedMesh mesh = build_mesh(2, 4, 4, 4);
    const PatchProblem prob(mesh, 1, InterpolationKind::AveragedL2);
    CorrectorSolver solver(prob);
    CoefficientField a;
    a.values.assign(static_cast<std::size_t>(prob.fineElementCount()), 1.0);
    for (std::size_t e = 0; e < a.values.size(); ++e)
      if (e % 12 < 6) a.values[e] = 1e-20;
    try {
      solver.solve(a);
      FAIL("expected a solver error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Solver);
      CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }
  }
}
