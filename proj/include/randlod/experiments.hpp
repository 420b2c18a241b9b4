#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "randlod/coefficient.hpp"
#include "randlod/interpolation.hpp"
#include "randlod/mesh.hpp"
#include "randlod/offline.hpp"

namespace randlod {

/// Campaign parameters. JSON keys: model, variant, beta_tilde, alpha, beta, dim,
/// nH, refinement, nEps, m, interpolation, source, p_grid, m_samp, seed,
/// nH_list, timing_reps, outputs.
struct CampaignConfig {
  std::string model = "checkerboard";  // checkerboard | inclusion
  std::string variant = "none";        // none | value | fill | shift | lshape
  double betaTilde = 1.0;
  double alpha = 0.1;
  double beta = 1.0;
  int dim = 2;
  int nH = 32;
  int refinement = 8;
  int nEps = 128;
  int m = 4;
  std::string interpolation = "averagedL2";
  std::string source = "sine";
  std::vector<double> pGrid{0.1};
  int mSamp = 50;
  std::uint64_t seed = 1;
  std::vector<int> nHList;  // oned: coarse sizes, h = eps
  int timingReps = 5;
  std::vector<std::string> outputs;
};

/// Throws Error(Config) on unknown keys, wrong types or inconsistent values.
CampaignConfig parse_config(const std::string& jsonText);
CampaignConfig load_config(const std::string& path);
/// Sorted-key JSON of every field, the input of config_hash.
std::string canonical_json(const CampaignConfig& c);
std::uint64_t config_hash(const CampaignConfig& c);

NestedMesh campaign_mesh(const CampaignConfig& c);
/// Base model with the variant applied, p = 0.
PeriodicModel campaign_model(const CampaignConfig& c);
InterpolationKind campaign_interpolation(const CampaignConfig& c);

/// String cells, numbers printed with 17 significant digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  double number(std::size_t row, const std::string& column) const;
  std::string csv() const;
};

void write_text(const std::string& path, const std::string& text);
std::string format_number(double v);

struct RunOptions {
  int threads = 1;
  std::function<void(const std::string&)> log;
};

/// Builds the offline database of a campaign (correctors retained).
OfflineDatabase campaign_offline(const CampaignConfig& c, const RunOptions& opts = {});

/// Per p: RMS relative L2 (coarse) and H1 (upscaled) errors of the offline-online
/// solution against per-sample PG-LOD. Columns p, rmsRelL2, rmsRelH1, mSamp, seed.
Table run_mc(const CampaignConfig& c, const OfflineDatabase* db, const RunOptions& opts = {});

/// Same table with the p = 0 LOD solution in place of the offline-online one.
Table run_deterministic_baseline(const CampaignConfig& c, const OfflineDatabase* db, const RunOptions& opts = {});

/// E_T of the center element against the solution errors. Columns p, rmsET,
/// rmsAbsL2, rmsRelL2, rmsRelH1, ratioETAbsL2, rmsCoarseNorm, T, mSamp, seed.
Table run_indicator_study(const CampaignConfig& c, const OfflineDatabase* db, const RunOptions& opts = {});

/// 1D harmonic-mean study over nHList x pGrid with h = eps. Columns H, p,
/// rmsMaxHarm, rmsHarm, rmsRelL2, checks, violations, maxRatio, mSamp, seed.
Table run_oned(const CampaignConfig& c, const RunOptions& opts = {});

struct TimingReport {
  double tStiff = 0.0;  // one corrector solve plus local assembly
  double tComb = 0.0;   // one mu-combination
  double tOfflineTotal = 0.0;
  double tOnlinePerSample = 0.0;  // combination, scatter and coarse solve
  double tNaivePerSample = 0.0;   // per-sample PG-LOD without upscaling
  double breakEven = 0.0;         // (N+1) tStiff / (nH^d (tStiff - tComb))
  int N = 0;
  int reps = 0;

  Table table() const;
};

/// Single worker; median over timingReps after one warm-up run.
TimingReport run_timing(const CampaignConfig& c, const RunOptions& opts = {});

}  // namespace randlod
