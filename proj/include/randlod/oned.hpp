#pragma once

#include <cstdint>
#include <vector>

#include "randlod/coefficient.hpp"
#include "randlod/linalg.hpp"
#include "randlod/mesh.hpp"

namespace randlod {

/// (|T|^{-1} int_T A^{-1})^{-1} by exact summation over the fine elements of T (1D).
double harmonic_mean(const CoefficientField& a, const NestedMesh& mesh, int T);

/// Harmonic means of the offline coefficients on one coarse element (m = 0).
struct OneDDatabase {
  NestedMesh mesh;
  PeriodicModel model;
  std::vector<double> aHarm;  // A_harm^i, i = 0..N
  double aBar = 0.0;          // int over one cell of 1/A_eps
  double aBarDef = 0.0;       // int over one copy of eps Q of 1/(A_eps+B_eps) - 1/A_eps

  int count() const { return static_cast<int>(aHarm.size()) - 1; }
};

OneDDatabase build_oned(const PeriodicModel& model, const NestedMesh& mesh);

double combined_harmonic(const OneDDatabase& db, const MuWeights& mu);
/// |T|/(N Abar) - N_def Abar_def |T| / (N Abar (N Abar + Abar_def)).
double combined_harmonic_closed(const OneDDatabase& db, int nDef);

/// (beta/alpha) ((beta-alpha)/alpha)^2 |Q|^2 (eps/H theta + 2 theta^2).
double thm41_bound(const PeriodicModel& model, double H, double eps, double theta);
/// |Q|^2 beta^3 (1/alpha - 1/beta)^2 (eps/H theta + 2 theta^2), the per-element bound.
double harmonic_bound(const PeriodicModel& model, double H, double eps, double theta);

struct HarmonicSummary {
  std::vector<double> aHarm;
  std::vector<double> aHarmMu;
  std::vector<double> thetaDef;
  std::vector<double> bound;
  double aBar = 0.0;
  double aBarDef = 0.0;
};

HarmonicSummary harmonic_summary(const OneDDatabase& db, const DefectSample& sample);

struct Thm41Violation {
  std::uint64_t seed = 0;
  std::uint64_t sample = 0;
  int T = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct Thm41Report {
  long checks = 0;
  std::vector<Thm41Violation> violations;
  double maxRatio = 0.0;  // max lhs/rhs over elements with rhs > 0
  double rmsError = 0.0;     // RMS of |A_harm - A_harm^mu| over samples and elements
  double rmsMaxError = 0.0;  // RMS over samples of max_T |A_harm - A_harm^mu|
};

/// Checks the per-element harmonic-mean bound for samples 0..samples-1.
Thm41Report verify_thm41(const OneDDatabase& db, std::uint64_t seed, int samples);

/// Coarse 1D FEM on the torus with one coefficient value per coarse element, zero mean.
Vec coarse_fem_1d(const NestedMesh& mesh, const std::vector<double>& elementCoefficient, const Vec& load);

}  // namespace randlod
