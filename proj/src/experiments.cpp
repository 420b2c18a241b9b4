#include "randlod/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "randlod/error.hpp"
#include "randlod/indicator.hpp"
#include "randlod/oned.hpp"
#include "randlod/online.hpp"
#include "randlod/reference.hpp"

namespace randlod {

using json = nlohmann::json;

namespace {

template <class T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("config key '") + key + "': " + e.what());
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::Config, "config: " + what);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void say(const RunOptions& opts, const std::string& s) {
  if (opts.log) opts.log(s);
}

std::string u64(std::uint64_t v) { return std::to_string(v); }

// log lines only; tables keep full precision
std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

PeriodicModel with_p(PeriodicModel m, double p) {
  m.p = p;
  return m;
}

}  // namespace

CampaignConfig parse_config(const std::string& jsonText) {
  json j;
  try {
    j = json::parse(jsonText);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "top level must be an object");
  static const std::set<std::string> keys = {"model", "variant", "beta_tilde", "alpha",  "beta",  "dim",
                                             "nH",    "refinement", "nEps", "m",      "interpolation",
                                             "source", "p_grid", "m_samp", "seed", "nH_list", "timing_reps",
                                             "outputs"};
  for (const auto& item : j.items()) require(keys.count(item.key()) == 1, "unknown key '" + item.key() + "'");

  CampaignConfig c;
  c.model = get(j, "model", c.model);
  c.variant = get(j, "variant", c.variant);
  c.betaTilde = get(j, "beta_tilde", c.betaTilde);
  c.alpha = get(j, "alpha", c.alpha);
  c.beta = get(j, "beta", c.beta);
  c.dim = get(j, "dim", c.dim);
  c.nH = get(j, "nH", c.nH);
  c.refinement = get(j, "refinement", c.refinement);
  c.nEps = get(j, "nEps", c.nEps);
  c.m = get(j, "m", c.m);
  c.interpolation = get(j, "interpolation", c.interpolation);
  c.source = get(j, "source", c.source);
  c.pGrid = get(j, "p_grid", c.pGrid);
  c.mSamp = get(j, "m_samp", c.mSamp);
  c.seed = get(j, "seed", c.seed);
  c.nHList = get(j, "nH_list", c.nHList);
  c.timingReps = get(j, "timing_reps", c.timingReps);
  c.outputs = get(j, "outputs", c.outputs);

  require(c.model == "checkerboard" || c.model == "inclusion", "model must be checkerboard or inclusion");
  require(c.variant == "none" || c.model == "inclusion", "defect variants apply to the inclusion model only");
  require(c.mSamp >= 1, "m_samp must be at least 1");
  require(c.m >= 0, "m must be nonnegative");
  require(c.timingReps >= 5, "timing_reps must be at least 5");
  require(!c.pGrid.empty(), "p_grid is empty");
  for (double p : c.pGrid) require(p >= 0.0 && p <= 1.0, "p_grid entries must lie in [0,1]");
  require(c.alpha > 0.0 && c.beta >= c.alpha, "need 0 < alpha <= beta");
  // Geometry, interpolation, source and variant names are validated by the builders.
  campaign_model(c);
  campaign_interpolation(c);
  named_source(c.source, c.dim);
  if (c.nHList.empty()) {
    campaign_mesh(c);
  } else {
    for (int nH : c.nHList) {
      require(nH > 0 && c.nEps % nH == 0, "nH_list entries must divide nEps");
      build_mesh(c.dim, nH, c.nEps / nH, c.nEps);
    }
  }
  return c;
}

CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_json(const CampaignConfig& c) {
  json j;  // std::map ordering gives sorted keys
  j["model"] = c.model;
  j["variant"] = c.variant;
  j["beta_tilde"] = c.betaTilde;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["dim"] = c.dim;
  j["nH"] = c.nH;
  j["refinement"] = c.refinement;
  j["nEps"] = c.nEps;
  j["m"] = c.m;
  j["interpolation"] = c.interpolation;
  j["source"] = c.source;
  j["p_grid"] = c.pGrid;
  j["m_samp"] = c.mSamp;
  j["seed"] = c.seed;
  j["nH_list"] = c.nHList;
  j["timing_reps"] = c.timingReps;
  j["outputs"] = c.outputs;
  return j.dump();
}

std::uint64_t config_hash(const CampaignConfig& c) {
  const std::string s = canonical_json(c);
  return crc64(s.data(), s.size());
}

NestedMesh campaign_mesh(const CampaignConfig& c) { return build_mesh(c.dim, c.nH, c.refinement, c.nEps); }

PeriodicModel campaign_model(const CampaignConfig& c) {
  const int nh = c.nHList.empty() ? c.nH * c.refinement : c.nEps;
  require(c.nEps > 0 && nh % c.nEps == 0, "fine elements per axis must be a multiple of nEps");
  const int fpc = nh / c.nEps;
  if (c.model == "checkerboard") return checkerboard_model(c.dim, c.alpha, c.beta, fpc);
  const PeriodicModel inc = inclusion_model(c.dim, c.alpha, c.beta, fpc);
  if (c.variant == "none") return inc;
  return defect_variant(inc, parse_variant(c.variant, c.betaTilde));
}

InterpolationKind campaign_interpolation(const CampaignConfig& c) { return parse_interpolation(c.interpolation); }

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) fail(ErrorKind::Data, "table row has the wrong number of cells");
  rows.push_back(std::move(row));
}

double Table::number(std::size_t row, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end() || row >= rows.size()) fail(ErrorKind::Data, "table has no cell (" + column + ")");
  return std::stod(rows[row][static_cast<std::size_t>(it - columns.begin())]);
}

std::string Table::csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += '\n';
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

OfflineDatabase campaign_offline(const CampaignConfig& c, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  OfflineDatabase db = build_offline(campaign_model(c), campaign_mesh(c), c.m, campaign_interpolation(c),
                                     named_source(c.source, c.dim), {true, opts.threads});
  say(opts, "offline: " + std::to_string(db.count() + 1) + " coefficients in " + brief(seconds_since(t0)) + " s");
  return db;
}

namespace {

struct Solution {
  Vec coarse;
  Vec upscaled;
};

Solution online_solution(const OfflineDatabase& db, const DefectSample& s, const NestedMesh& mesh) {
  CoarseSystem sys = assemble_global(db, s, mesh);
  solve_coarse(sys, mesh);
  return {sys.solution, upscale(db, s, mesh, sys.solution)};
}

Table error_campaign(const CampaignConfig& c, const OfflineDatabase* given, const RunOptions& opts, bool baseline) {
  const NestedMesh mesh = campaign_mesh(c);
  const PeriodicModel model = campaign_model(c);
  OfflineDatabase own;
  if (!given) own = campaign_offline(c, opts);
  const OfflineDatabase& db = given ? *given : own;
  check_geometry(db, mesh);
  const InterpolationKind kind = campaign_interpolation(c);

  Solution fixed;
  if (baseline) fixed = online_solution(db, sample_defects(with_p(model, 0.0), mesh, c.seed, 0), mesh);

  Table t;
  t.columns = {"p", "rmsRelL2", "rmsRelH1", "mSamp", "seed"};
  for (double p : c.pGrid) {
    const PeriodicModel mp = with_p(model, p);
    double sqL2 = 0.0, sqH1 = 0.0;
    for (int k = 0; k < c.mSamp; ++k) {
      try {
        const DefectSample s = sample_defects(mp, mesh, c.seed, static_cast<std::uint64_t>(k));
        const Solution tilde = baseline ? fixed : online_solution(db, s, mesh);
        const ReferenceSolution ref = pglod_solve(realize(mp, s, mesh), mesh, c.m, kind, db.load, {true, opts.threads});
        const RelativeErrors e = relative_errors(mesh, ref.coarse, ref.upscaled, tilde.coarse, tilde.upscaled);
        sqL2 += e.relL2 * e.relL2;
        sqH1 += e.relH1 * e.relH1;
      } catch (const Error& e) {
        throw Error(e.kind(), "p=" + format_number(p) + " sample " + std::to_string(k) + ": " + e.what());
      }
    }
    const double l2 = std::sqrt(sqL2 / c.mSamp), h1 = std::sqrt(sqH1 / c.mSamp);
    say(opts, std::string(baseline ? "baseline" : "mc") + " p=" + brief(p) + " rmsRelL2=" + brief(l2) +
                  " rmsRelH1=" + brief(h1));
    t.add({format_number(p), format_number(l2), format_number(h1), std::to_string(c.mSamp), u64(c.seed)});
  }
  return t;
}

}  // namespace

Table run_mc(const CampaignConfig& c, const OfflineDatabase* db, const RunOptions& opts) {
  return error_campaign(c, db, opts, false);
}

Table run_deterministic_baseline(const CampaignConfig& c, const OfflineDatabase* db, const RunOptions& opts) {
  return error_campaign(c, db, opts, true);
}

Table run_indicator_study(const CampaignConfig& c, const OfflineDatabase* given, const RunOptions& opts) {
  const NestedMesh mesh = campaign_mesh(c);
  const PeriodicModel model = campaign_model(c);
  OfflineDatabase own;
  if (!given) own = campaign_offline(c, opts);
  const OfflineDatabase& db = given ? *given : own;
  check_geometry(db, mesh);
  const InterpolationKind kind = campaign_interpolation(c);
  const PatchProblem problem(mesh, c.m, kind);
  const int T = mesh.coarseGrid().index(mesh.nH / 2, mesh.dim == 2 ? mesh.nH / 2 : 0);
  const PatchGeometry pT = patch(mesh, T, c.m);

  Table t;
  t.columns = {"p", "rmsET", "rmsAbsL2", "rmsRelL2", "rmsRelH1", "ratioETAbsL2", "rmsCoarseNorm", "T", "mSamp", "seed"};
  for (double p : c.pGrid) {
    const PeriodicModel mp = with_p(model, p);
    double sqE = 0.0, sqAbs = 0.0, sqRel = 0.0, sqH1 = 0.0, sqNorm = 0.0;
    for (int k = 0; k < c.mSamp; ++k) {
      const DefectSample s = sample_defects(mp, mesh, c.seed, static_cast<std::uint64_t>(k));
      const CoefficientField a = realize(mp, s, mesh);
      const double et = indicator_ET(compute_SB(problem, restrict_to_patch(a, pT), db, extract_mu(s, pT)));
      const Solution tilde = online_solution(db, s, mesh);
      const ReferenceSolution ref = pglod_solve(a, mesh, c.m, kind, db.load, {true, opts.threads});
      const RelativeErrors e = relative_errors(mesh, ref.coarse, ref.upscaled, tilde.coarse, tilde.upscaled);
      const double norm = coarse_l2_norm(mesh, ref.coarse);
      sqE += et * et;
      sqAbs += e.absL2 * e.absL2;
      sqRel += e.relL2 * e.relL2;
      sqH1 += e.relH1 * e.relH1;
      sqNorm += norm * norm;
    }
    const double n = c.mSamp;
    const double rE = std::sqrt(sqE / n), rAbs = std::sqrt(sqAbs / n);
    const double ratio = rAbs > 0.0 ? rE / rAbs : (rE == 0.0 ? 0.0 : INFINITY);
    say(opts, "indicator p=" + brief(p) + " rmsET=" + brief(rE) + " rmsAbsL2=" + brief(rAbs));
    t.add({format_number(p), format_number(rE), format_number(rAbs), format_number(std::sqrt(sqRel / n)),
           format_number(std::sqrt(sqH1 / n)), format_number(ratio), format_number(std::sqrt(sqNorm / n)),
           std::to_string(T), std::to_string(c.mSamp), u64(c.seed)});
  }
  return t;
}

Table run_oned(const CampaignConfig& c, const RunOptions& opts) {
  require(c.dim == 1, "oned needs dim = 1");
  const std::vector<int> sizes = c.nHList.empty() ? std::vector<int>{c.nH} : c.nHList;
  PeriodicModel model = campaign_model(c);
  const SourceTerm f = named_source(c.source, 1);
  Table t;
  t.columns = {"H", "p", "rmsMaxHarm", "rmsHarm", "rmsRelL2", "checks", "violations", "maxRatio", "mSamp", "seed"};
  for (int nH : sizes) {
    const NestedMesh mesh = build_mesh(1, nH, c.nEps / nH, c.nEps);
    const Vec F = load_vector(mesh, f);
    for (double p : c.pGrid) {
      model.p = p;
      const OneDDatabase db = build_oned(model, mesh);
      const Thm41Report rep = verify_thm41(db, c.seed, c.mSamp);
      // Nodal PG-LOD with m = 0 is the coarse FEM with the element harmonic means.
      double sq = 0.0;
      for (int k = 0; k < c.mSamp; ++k) {
        const HarmonicSummary h = harmonic_summary(db, sample_defects(model, mesh, c.seed, static_cast<std::uint64_t>(k)));
        const Vec u = coarse_fem_1d(mesh, h.aHarm, F);
        const Vec ut = coarse_fem_1d(mesh, h.aHarmMu, F);
        const double rel = coarse_l2_norm(mesh, u - ut) / coarse_l2_norm(mesh, u);
        sq += rel * rel;
      }
      say(opts, "oned H=1/" + std::to_string(nH) + " p=" + brief(p) + " violations=" +
                    std::to_string(rep.violations.size()));
      t.add({format_number(mesh.H()), format_number(p), format_number(rep.rmsMaxError), format_number(rep.rmsError),
             format_number(std::sqrt(sq / c.mSamp)), std::to_string(rep.checks), std::to_string(rep.violations.size()),
             format_number(rep.maxRatio), std::to_string(c.mSamp), u64(c.seed)});
    }
  }
  return t;
}

Table TimingReport::table() const {
  Table t;
  t.columns = {"tStiff", "tComb", "tOfflineTotal", "tOnlinePerSample", "tNaivePerSample", "breakEven", "N", "reps"};
  t.add({format_number(tStiff), format_number(tComb), format_number(tOfflineTotal), format_number(tOnlinePerSample),
         format_number(tNaivePerSample), format_number(breakEven), std::to_string(N), std::to_string(reps)});
  return t;
}

TimingReport run_timing(const CampaignConfig& c, const RunOptions& opts) {
  using clock = std::chrono::steady_clock;
  const NestedMesh mesh = campaign_mesh(c);
  const PeriodicModel model = campaign_model(c);
  const PeriodicModel mp = with_p(model, c.pGrid.front());
  const InterpolationKind kind = campaign_interpolation(c);
  const SourceTerm f = named_source(c.source, c.dim);
  TimingReport r;
  r.reps = c.timingReps;

  auto t0 = clock::now();
  const OfflineDatabase db = build_offline(model, mesh, c.m, kind, f, {false, 1});
  r.tOfflineTotal = seconds_since(t0);
  r.N = db.count();
  say(opts, "timing: offline " + brief(r.tOfflineTotal) + " s");

  const PatchProblem problem(mesh, c.m, kind);
  CorrectorSolver solver(problem);
  const CoefficientField a0 = db.coefficients.coefficient(0);
  std::vector<double> v;
  for (int k = 0; k <= c.timingReps; ++k) {
    t0 = clock::now();
    const Mat b = local_stiffness(problem, a0, solver.solve(a0));
    if (k > 0) v.push_back(seconds_since(t0));
    if (!b.allFinite()) fail(ErrorKind::Numeric, "timing: nonfinite local matrix");
  }
  r.tStiff = median(v);

  const int n = mesh.coarseCount();
  std::vector<MuWeights> mus;
  const DefectSample s0 = sample_defects(mp, mesh, c.seed, 0);
  for (int T = 0; T < n; ++T) mus.push_back(extract_mu(s0, patch(mesh, T, c.m)));
  v.clear();
  double sink = 0.0;
  for (int k = 0; k <= c.timingReps; ++k) {
    t0 = clock::now();
    for (const MuWeights& mu : mus) sink += combine_local(db, mu)(0, 0);
    if (k > 0) v.push_back(seconds_since(t0) / n);
  }
  r.tComb = median(v);
  if (!std::isfinite(sink)) fail(ErrorKind::Numeric, "timing: nonfinite combination");

  v.clear();
  for (int k = 0; k <= c.timingReps; ++k) {
    const DefectSample s = sample_defects(mp, mesh, c.seed, static_cast<std::uint64_t>(k));
    t0 = clock::now();
    CoarseSystem sys = assemble_global(db, s, mesh);
    solve_coarse(sys, mesh);
    if (k > 0) v.push_back(seconds_since(t0));
  }
  r.tOnlinePerSample = median(v);
  say(opts, "timing: online " + brief(r.tOnlinePerSample) + " s per sample");

  v.clear();
  for (int k = 0; k <= c.timingReps; ++k) {
    const DefectSample s = sample_defects(mp, mesh, c.seed, static_cast<std::uint64_t>(k));
    const CoefficientField a = realize(mp, s, mesh);
    t0 = clock::now();
    pglod_solve(a, mesh, c.m, kind, db.load, {false, 1});
    if (k > 0) v.push_back(seconds_since(t0));
    say(opts, "timing: naive sample " + std::to_string(k));
  }
  r.tNaivePerSample = median(v);
  r.breakEven = (r.N + 1) * r.tStiff / (n * (r.tStiff - r.tComb));
  return r;
}

}  // namespace randlod
