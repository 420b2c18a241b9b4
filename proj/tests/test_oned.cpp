#include <cmath>

#include "doctest.h"
#include "randlod/error.hpp"
#include "randlod/oned.hpp"
#include "randlod/reference.hpp"

using namespace randlod;

namespace {

DefectSample with_bits(const NestedMesh& mesh, const std::vector<int>& cells) {
  DefectSample s;
  s.dim = 1;
  s.nEps = mesh.nEps;
  s.bits.assign(static_cast<std::size_t>(mesh.cellCount()), 0);
  for (int c : cells) s.bits[static_cast<std::size_t>(c)] = 1;
  return s;
}

}  // namespace

TEST_SUITE("oned") {
  TEST_CASE("harmonic mean") {
    const NestedMesh mesh = build_mesh(1, 2, 2, 2);
    CoefficientField a;
    a.values = {0.1, 1.0, 3.0, 3.0};
    CHECK(harmonic_mean(a, mesh, 0) == doctest::Approx(1.0 / 5.5).epsilon(1e-15));
    CHECK(harmonic_mean(a, mesh, 1) == doctest::Approx(3.0).epsilon(1e-15));

    const NestedMesh fine = build_mesh(1, 2, 16, 2);
    CoefficientField b;
    for (int e = 0; e < 32; ++e) b.values.push_back((e % 16) < 8 ? 0.1 : 1.0);
    CHECK(harmonic_mean(b, fine, 0) == doctest::Approx(1.0 / 5.5).epsilon(1e-14));

    a.values[1] = 0.0;
    CHECK_THROWS_AS(harmonic_mean(a, mesh, 0), Error);
    const NestedMesh two = build_mesh(2, 2, 2, 2);
    CoefficientField c;
    c.values.assign(16, 1.0);
    CHECK_THROWS_AS(harmonic_mean(c, two, 0), Error);
  }

  TEST_CASE("combined harmonic mean against its closed form") {
    const NestedMesh mesh = build_mesh(1, 4, 8, 16);
    const PeriodicModel model = checkerboard_model(1, 0.1, 1.0, 2);
    const OneDDatabase db = build_oned(model, mesh);
    REQUIRE(db.count() == 4);
    CHECK(db.aBar == doctest::Approx(1.0 / 16 / 0.1).epsilon(1e-14));
    CHECK(db.aBarDef == doctest::Approx(1.0 / 16 / 1.0 - 1.0 / 16 / 0.1).epsilon(1e-14));
    const std::vector<std::vector<int>> sets = {{}, {5}, {4, 6}, {8, 9, 11}, {12, 13, 14, 15}, {0, 7}};
    for (const auto& cells : sets) {
      const DefectSample s = with_bits(mesh, cells);
      const CoefficientField a = realize(model, s, mesh);
      for (int T = 0; T < 4; ++T) {
        const MuWeights mu = extract_mu(s, patch(mesh, T, 0));
        const double sum = combined_harmonic(db, mu);
        CAPTURE(T);
        CHECK(std::abs(sum - combined_harmonic_closed(db, mu.defects())) < 1e-14);
        if (mu.defects() <= 1) CHECK(std::abs(sum - harmonic_mean(a, mesh, T)) < 1e-14);
      }
    }
  }

  TEST_CASE("bound constants") {
    const PeriodicModel model = checkerboard_model(1, 0.1, 1.0, 1);
    CHECK(thm41_bound(model, 0.25, 1.0 / 16, 0.1) == doctest::Approx(10.0 * 81.0 * (0.025 + 0.02)).epsilon(1e-13));
    CHECK(thm41_bound(model, 0.25, 1.0 / 16, 0.1) == doctest::Approx(36.45).epsilon(1e-13));
    CHECK(thm41_bound(model, 0.25, 1.0 / 16, 0.0) == 0.0);
    CHECK(thm41_bound(checkerboard_model(1, 0.5, 0.5, 1), 0.25, 1.0 / 16, 0.3) == 0.0);
    // beta^3 (1/alpha - 1/beta)^2 = alpha (beta/alpha) ((beta-alpha)/alpha)^2
    for (double theta : {0.05, 0.2, 0.5})
      CHECK(harmonic_bound(model, 0.125, 1.0 / 64, theta) ==
            doctest::Approx(model.alpha * thm41_bound(model, 0.125, 1.0 / 64, theta)).epsilon(1e-13));
  }

  TEST_CASE("per-element bound holds on sampled defects") {
    const NestedMesh mesh = build_mesh(1, 8, 8, 64);
    PeriodicModel model = checkerboard_model(1, 0.1, 1.0, 1);
    for (double p : {0.05, 0.2, 0.5}) {
      model.p = p;
      const OneDDatabase db = build_oned(model, mesh);
      const Thm41Report rep = verify_thm41(db, 11, 40);
      CHECK(rep.checks == 40 * 8);
      CHECK(rep.violations.empty());
      CHECK(rep.maxRatio <= 1.0);
      CHECK(rep.rmsError > 0.0);
      const HarmonicSummary s = harmonic_summary(db, sample_defects(model, mesh, 3, 0));
      for (double v : s.aHarmMu) CHECK(v >= model.alpha);
    }
    model.p = 0.0;
    const Thm41Report none = verify_thm41(build_oned(model, mesh), 11, 5);
    CHECK(none.rmsError == 0.0);
    CHECK(none.maxRatio == 0.0);
  }

  TEST_CASE("nodal PG-LOD with m = 0 is FEM with the harmonic means") {
    const NestedMesh mesh = build_mesh(1, 8, 8, 32);
    PeriodicModel model = checkerboard_model(1, 0.1, 1.0, 2);
    model.p = 0.3;
    const CoefficientField a = realize(model, sample_defects(model, mesh, 4, 1), mesh);
    const Vec F = load_vector(mesh, named_source("sine", 1));
    const ReferenceSolution r = pglod_solve(a, mesh, 0, InterpolationKind::Nodal1d, F);
    std::vector<double> harm;
    for (int T = 0; T < 8; ++T) harm.push_back(harmonic_mean(a, mesh, T));
    const Mat K = r.stiffness.toDense();
    Mat ref = Mat::Zero(8, 8);
    for (int T = 0; T < 8; ++T) {
      const int i = T, j = (T + 1) % 8;
      const double k = harm[static_cast<std::size_t>(T)] * 8.0;
      ref(i, i) += k;
      ref(j, j) += k;
      ref(i, j) -= k;
      ref(j, i) -= k;
    }
    CHECK((K - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
    CHECK((r.coarse - coarse_fem_1d(mesh, harm, F)).cwiseAbs().maxCoeff() < 1e-10);
  }
}
