#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "randlod/error.hpp"
#include "randlod/indicator.hpp"
#include "randlod/interpolation.hpp"
#include "randlod/online.hpp"
#include "randlod/reference.hpp"

using namespace randlod;

namespace {

struct Setup {
  NestedMesh mesh = build_mesh(2, 4, 2, 4);
  PeriodicModel model = checkerboard_model(2, 0.1, 1.0, 2);
  OfflineDatabase db;
  PatchProblem prob{mesh, 1, InterpolationKind::AveragedL2};
  Setup() { db = build_offline(model, mesh, 1, InterpolationKind::AveragedL2, named_source("sine", 2)); }
};

MuWeights unit_mu(int N, int i) {
  MuWeights mu;
  mu.N = N;
  if (i > 0) {
    mu.mu0 = 0.0;
    mu.active = {i};
  }
  return mu;
}

}  // namespace

TEST_SUITE("indicator") {
  TEST_CASE("sample equal to an offline coefficient gives zero") {
    const Setup s;
    for (int i : {0, 1, 5, 9}) {
      const IndicatorMatrices m = compute_SB(s.prob, s.db.coefficients.coefficient(i), s.db, unit_mu(s.db.count(), i));
      CHECK(m.S.cwiseAbs().maxCoeff() == 0.0);
      CHECK(indicator_ET(m) == 0.0);
    }
  }

  TEST_CASE("B annihilates constants and both matrices are symmetric") {
    const Setup s;
    PeriodicModel m = s.model;
    m.p = 0.5;
    for (std::uint64_t k = 0; k < 4; ++k) {
      const DefectSample d = sample_defects(m, s.mesh, 3, k);
      const PatchGeometry p = patch(s.mesh, 5, 1);
      const IndicatorMatrices im = compute_SB(s.prob, realize_patch(m, d, s.mesh, p), s.db, extract_mu(d, p));
      CHECK((im.B * Vec::Ones(4)).cwiseAbs().maxCoeff() < 1e-13 * im.B.norm());
      CHECK((im.S - im.S.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, im.S.norm()));
      CHECK(indicator_ET(im) >= 0.0);
    }
  }

  TEST_CASE("S against the dense oracle") {
    const Setup s;
    const oracle::Grid g = oracle::grid_of(s.mesh);
    PeriodicModel m = s.model;
    m.p = 0.35;
    const DefectSample d = sample_defects(m, s.mesh, 17, 2);
    const CoefficientField a = realize(m, d, s.mesh);
    for (int T : {0, 10}) {
      const PatchGeometry p = patch(s.mesh, T, 1);
      // Offline coefficients translated to T as global fields.
      std::vector<std::vector<double>> Ai;
      DefectSample none = d;
      std::fill(none.bits.begin(), none.bits.end(), 0);
      Ai.push_back(realize(m, none, s.mesh).values);
      std::vector<double> mu{1.0};
      for (int c = 0; c < p.localCells().size(); ++c) {
        const int cell = p.globalCell(c, s.mesh.nEps);
        DefectSample one = none;
        one.bits[static_cast<std::size_t>(cell)] = 1;
        Ai.push_back(realize(m, one, s.mesh).values);
        const double bit = d.bits[static_cast<std::size_t>(cell)];
        mu.push_back(bit);
        mu[0] -= bit;
      }
      const Mat ref = oracle::indicator_S(g, a.values, Ai, mu, T, 1);
      const IndicatorMatrices im = compute_SB(s.prob, restrict_to_patch(a, p), s.db, extract_mu(d, p));
      CHECK((im.S - ref).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((im.S - ref).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, ref.norm()));
      // Relabeling the offline coefficients leaves S unchanged.
      std::reverse(Ai.begin() + 1, Ai.end());
      std::reverse(mu.begin() + 1, mu.end());
      CHECK((oracle::indicator_S(g, a.values, Ai, mu, T, 1) - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("Rayleigh quotients never exceed the indicator") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
      Mat x(4, 4), y(4, 3);
      for (auto& v : x.reshaped()) v = gauss(rng);
      for (auto& v : y.reshaped()) v = gauss(rng);
      // B: SPD on the complement of constants with B 1 = 0.
      Mat P = Mat::Identity(4, 4) - Mat::Constant(4, 4, 0.25);
      IndicatorMatrices m;
      m.B = P * (x * x.transpose() + Mat::Identity(4, 4)) * P;
      m.S = y * y.transpose();
      const double et = indicator_ET(m);
      for (int k = 0; k < 100; ++k) {
        Vec v(4);
        for (auto& c : v) c = gauss(rng);
        v.array() -= v.mean();
        CHECK(std::sqrt(v.dot(m.S * v) / v.dot(m.B * v)) <= et + 1e-10);
      }
    }
  }

  TEST_CASE("degenerate inputs") {
    IndicatorMatrices m;
    m.S = Mat::Zero(4, 4);
    m.B = Mat::Identity(4, 4);
    CHECK(indicator_ET(m) == 0.0);
    m.S = Mat::Identity(4, 4);
    m.B = Mat::Zero(4, 4);
    CHECK_THROWS_AS(indicator_ET(m), Error);
  }

  TEST_CASE("local consistency within twice the indicator") {
    const Setup s;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss;
    PeriodicModel m = s.model;
    m.p = 0.4;
    CorrectorSolver solver(s.prob);
    const SparseMatrix P = prolongation(s.mesh);
    int nonzero = 0;
    for (std::uint64_t k = 0; k < 6; ++k) {
      const DefectSample d = sample_defects(m, s.mesh, 40, k);
      const CoefficientField a = realize(m, d, s.mesh);
      for (int T = 0; T < s.mesh.coarseCount(); ++T) {
        const PatchGeometry p = patch(s.mesh, T, 1);
        const CoefficientField ap = restrict_to_patch(a, p);
        const MuWeights mu = extract_mu(d, p);
        const Mat bT = local_stiffness(s.prob, ap, solver.solve(ap));
        const Mat bTilde = combine_local(s.db, mu);
        const IndicatorMatrices im = compute_SB(s.prob, ap, s.db, mu);
        const double et = indicator_ET(im);
        nonzero += et > 0.0;
        CoefficientField masked;
        masked.values.assign(a.values.size(), 0.0);
        for (int e : p.fineElements) masked.values[static_cast<std::size_t>(e)] = a.values[static_cast<std::size_t>(e)];
        const SparseMatrix KU = fine_stiffness(s.mesh, &masked);
        for (int r = 0; r < 5; ++r) {
          Vec c(4), W(s.mesh.coarseCount());
          for (auto& x : c) x = gauss(rng);
          for (auto& x : W) x = gauss(rng);
          Vec wl(static_cast<Eigen::Index>(p.coarseNodes.size()));
          for (std::size_t q = 0; q < p.coarseNodes.size(); ++q) wl[static_cast<Eigen::Index>(q)] = W[p.coarseNodes[q]];
          const double diff = std::abs(c.dot((bT - bTilde) * wl));
          const Vec fw = P.multiply(W);
          const double vnorm = std::sqrt(c.dot(im.B * c));
          const double wnorm = std::sqrt(fw.dot(KU.multiply(fw)));
          CHECK(diff <= 2.0 * et * vnorm * wnorm * (1 + 1e-9) + 1e-12);
        }
      }
    }
    CHECK(nonzero > 0);
  }
}
