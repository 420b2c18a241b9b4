#include "randlod/oned.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "randlod/error.hpp"
#include "randlod/offline.hpp"
#include "randlod/online.hpp"

namespace randlod {

namespace {

void require_1d(const NestedMesh& mesh, const char* what) {
  if (mesh.dim != 1) fail(ErrorKind::Unsupported, std::string(what) + ": the harmonic-mean theory is one-dimensional");
}

}  // namespace

double harmonic_mean(const CoefficientField& a, const NestedMesh& mesh, int T) {
  require_1d(mesh, "harmonic_mean");
  const double h = mesh.h();
  double inv = 0.0;
  for (int e : mesh.fineElementsOf(T)) {
    const double v = a.values[static_cast<std::size_t>(e)];
    if (!(v > 0.0)) fail(ErrorKind::Data, "harmonic_mean: nonpositive coefficient " + std::to_string(v));
    inv += h / v;
  }
  return mesh.H() / inv;
}

OneDDatabase build_oned(const PeriodicModel& model, const NestedMesh& mesh) {
  require_1d(mesh, "build_oned");
  model.validate();
  OneDDatabase db;
  db.mesh = mesh;
  db.model = model;
  const PatchGeometry ref = patch(mesh, 0, 0);
  const OfflineCoefficients oc = offline_coefficients(model, mesh, ref);
  // With m = 0 the reference patch is a single coarse element.
  for (int i = 0; i <= oc.count(); ++i) {
    double inv = 0.0;
    for (double v : oc.coefficient(i).values) inv += mesh.h() / v;
    db.aHarm.push_back(mesh.H() / inv);
  }
  const double h = mesh.h();
  const int rc = model.finePerCell;
  for (int k = 0; k < rc; ++k) {
    const double ap = model.aPerCell[static_cast<std::size_t>(k)];
    const double bp = model.bPerCell[static_cast<std::size_t>(k)];
    db.aBar += h / ap;
    if (bp != 0.0) db.aBarDef += h / (ap + bp) - h / ap;
  }
  return db;
}

double combined_harmonic(const OneDDatabase& db, const MuWeights& mu) {
  if (mu.N != db.count()) fail(ErrorKind::Data, "combined_harmonic: weight vector does not match the database");
  double s = mu.mu0 * db.aHarm[0];
  for (int i : mu.active) s += db.aHarm[static_cast<std::size_t>(i)];
  return s;
}

double combined_harmonic_closed(const OneDDatabase& db, int nDef) {
  const double T = db.mesh.H();
  const double NA = db.count() * db.aBar;
  return T / NA - nDef * db.aBarDef * T / (NA * (NA + db.aBarDef));
}

double thm41_bound(const PeriodicModel& model, double H, double eps, double theta) {
  const double a = model.alpha, b = model.beta;
  const double q = model.qMeasure();
  const double c = (b - a) / a;
  return (b / a) * c * c * q * q * (eps / H * theta + 2.0 * theta * theta);
}

double harmonic_bound(const PeriodicModel& model, double H, double eps, double theta) {
  const double a = model.alpha, b = model.beta;
  const double q = model.qMeasure();
  const double c = 1.0 / a - 1.0 / b;
  return q * q * b * b * b * c * c * (eps / H * theta + 2.0 * theta * theta);
}

HarmonicSummary harmonic_summary(const OneDDatabase& db, const DefectSample& sample) {
  const NestedMesh& mesh = db.mesh;
  const CoefficientField a = realize(db.model, sample, mesh);
  HarmonicSummary s;
  s.aBar = db.aBar;
  s.aBarDef = db.aBarDef;
  for (int T = 0; T < mesh.coarseCount(); ++T) {
    const MuWeights mu = extract_mu(sample, patch(mesh, T, 0));
    const double theta = static_cast<double>(mu.defects()) / mu.N;
    s.aHarm.push_back(harmonic_mean(a, mesh, T));
    s.aHarmMu.push_back(combined_harmonic(db, mu));
    s.thetaDef.push_back(theta);
    s.bound.push_back(harmonic_bound(db.model, mesh.H(), mesh.eps(), theta));
  }
  return s;
}

Thm41Report verify_thm41(const OneDDatabase& db, std::uint64_t seed, int samples) {
  Thm41Report rep;
  double sq = 0.0, sqMax = 0.0;
  for (int k = 0; k < samples; ++k) {
    double worst = 0.0;
    const DefectSample sample = sample_defects(db.model, db.mesh, seed, static_cast<std::uint64_t>(k));
    const HarmonicSummary s = harmonic_summary(db, sample);
    for (std::size_t T = 0; T < s.aHarm.size(); ++T) {
      const double lhs = std::abs(s.aHarm[T] - s.aHarmMu[T]);
      const double rhs = s.bound[T];
      sq += lhs * lhs;
      worst = std::max(worst, lhs);
      ++rep.checks;
      // Rounding slack only: both sides vanish without defects.
      if (lhs > rhs * (1.0 + 1e-12) + 1e-14)
        rep.violations.push_back({seed, static_cast<std::uint64_t>(k), static_cast<int>(T), lhs, rhs});
      if (rhs > 0.0) rep.maxRatio = std::max(rep.maxRatio, lhs / rhs);
    }
    sqMax += worst * worst;
  }
  if (rep.checks > 0) rep.rmsError = std::sqrt(sq / static_cast<double>(rep.checks));
  if (samples > 0) rep.rmsMaxError = std::sqrt(sqMax / samples);
  return rep;
}

Vec coarse_fem_1d(const NestedMesh& mesh, const std::vector<double>& elementCoefficient, const Vec& load) {
  require_1d(mesh, "coarse_fem_1d");
  const int n = mesh.nH;
  if (static_cast<int>(elementCoefficient.size()) != n || load.size() != n)
    fail(ErrorKind::Data, "coarse_fem_1d: sizes do not match the coarse mesh");
  CoarseSystem sys;
  TripletAccumulator acc(n, n);
  const double H = mesh.H();
  for (int T = 0; T < n; ++T) {
    const int a = T, b = wrap(T + 1, n);
    const double k = elementCoefficient[static_cast<std::size_t>(T)] / H;
    acc.add(a, a, k);
    acc.add(a, b, -k);
    acc.add(b, a, -k);
    acc.add(b, b, k);
  }
  sys.stiffness = acc.finalize(true);
  sys.load = load;
  return solve_coarse(sys, mesh);
}

}  // namespace randlod
