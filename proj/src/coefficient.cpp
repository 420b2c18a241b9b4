#include "randlod/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "randlod/error.hpp"

namespace randlod {

namespace {

bool on_grid(double x, int rc) { return std::abs(x * rc - std::round(x * rc)) < 1e-9; }

// Sets table entries whose fine element lies inside [lo,hi]^d (cell coordinates).
void fill_box(std::vector<double>& table, const Box& cell, int rc, double lo, double hi, double value) {
  if (!on_grid(lo, rc) || !on_grid(hi, rc))
    fail(ErrorKind::Data, "model: box edge not resolved by " + std::to_string(rc) + " fine elements per cell");
  const int klo = static_cast<int>(std::lround(lo * rc));
  const int khi = static_cast<int>(std::lround(hi * rc));
  for (int k1 = 0; k1 < cell.n[1]; ++k1) {
    const bool in1 = cell.n[1] == 1 || (k1 >= klo && k1 < khi);
    for (int k0 = 0; k0 < cell.n[0]; ++k0)
      if (in1 && k0 >= klo && k0 < khi) table[static_cast<std::size_t>(cell.index(k0, k1))] = value;
  }
}

void recompute_bounds(PeriodicModel& m) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < m.aPerCell.size(); ++k) {
    for (double v : {m.aPerCell[k], m.aPerCell[k] + m.bPerCell[k]}) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  m.alpha = lo;
  m.beta = hi;
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double PeriodicModel::qMeasure() const {
  double m = qHi[0] - qLo[0];
  if (dim == 2) m *= qHi[1] - qLo[1];
  return m;
}

void PeriodicModel::validate() const {
  const Box cell = cellBox();
  if (static_cast<int>(aPerCell.size()) != cell.size() || static_cast<int>(bPerCell.size()) != cell.size())
    fail(ErrorKind::Data, "model: cell tables do not match finePerCell^d");
  if (!(alpha > 0.0) || !(beta >= alpha)) fail(ErrorKind::Data, "model: require 0 < alpha <= beta");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Data, "model: defect probability must lie in [0,1]");
  const double tol = 1e-12 * beta;
  for (int k = 0; k < cell.size(); ++k) {
    const double a = aPerCell[k];
    const double ab = a + bPerCell[k];
    if (a < alpha - tol || a > beta + tol || ab < alpha - tol || ab > beta + tol)
      fail(ErrorKind::Data, "model: periodic or perturbed value outside [alpha, beta]");
    const Index2 c = cell.coords(k);
    const double x0 = (c[0] + 0.5) / finePerCell;
    const double x1 = (c[1] + 0.5) / finePerCell;
    const bool inQ = x0 > qLo[0] && x0 < qHi[0] && (dim == 1 || (x1 > qLo[1] && x1 < qHi[1]));
    if (!inQ && bPerCell[k] != 0.0) fail(ErrorKind::Data, "model: B_per is nonzero outside Q");
  }
}

PeriodicModel checkerboard_model(int dim, double alpha, double beta, int finePerCell) {
  PeriodicModel m;
  m.name = "checkerboard";
  m.dim = dim;
  m.finePerCell = finePerCell;
  const int n = m.cellBox().size();
  m.aPerCell.assign(static_cast<std::size_t>(n), alpha);
  m.bPerCell.assign(static_cast<std::size_t>(n), beta - alpha);
  m.alpha = alpha;
  m.beta = beta;
  m.validate();
  return m;
}

PeriodicModel inclusion_model(int dim, double alpha, double beta, int finePerCell) {
  PeriodicModel m;
  m.name = "inclusion";
  m.dim = dim;
  m.finePerCell = finePerCell;
  const Box cell = m.cellBox();
  m.aPerCell.assign(static_cast<std::size_t>(cell.size()), alpha);
  m.bPerCell.assign(static_cast<std::size_t>(cell.size()), 0.0);
  fill_box(m.aPerCell, cell, finePerCell, 0.25, 0.75, beta);
  fill_box(m.bPerCell, cell, finePerCell, 0.25, 0.75, alpha - beta);
  m.qLo = {0.25, dim == 2 ? 0.25 : 0.0};
  m.qHi = {0.75, dim == 2 ? 0.75 : 1.0};
  m.alpha = alpha;
  m.beta = beta;
  m.validate();
  return m;
}

PeriodicModel defect_variant(const PeriodicModel& inclusion, const DefectVariant& variant) {
  if (inclusion.name != "inclusion") fail(ErrorKind::Data, "defect_variant: base model must be the inclusion model");
  const double alpha = inclusion.alpha;
  const double beta = inclusion.beta;
  const int rc = inclusion.finePerCell;
  PeriodicModel m = inclusion;
  m.name = to_string(variant);
  const Box cell = m.cellBox();
  std::fill(m.bPerCell.begin(), m.bPerCell.end(), 0.0);
  const bool two = m.dim == 2;
  switch (variant.kind) {
    case VariantKind::Value:
      if (!(variant.betaTilde > 0.0)) fail(ErrorKind::Data, "defect_variant: defect value must be positive");
      fill_box(m.bPerCell, cell, rc, 0.25, 0.75, variant.betaTilde - beta);
      break;
    case VariantKind::Fill:
      fill_box(m.bPerCell, cell, rc, 0.0, 1.0, beta - alpha);
      fill_box(m.bPerCell, cell, rc, 0.25, 0.75, 0.0);
      m.qLo = {0.0, 0.0};
      m.qHi = {1.0, 1.0};
      break;
    case VariantKind::Shift:
      fill_box(m.bPerCell, cell, rc, 0.25, 0.75, alpha - beta);
      fill_box(m.bPerCell, cell, rc, 0.75, 1.0, beta - alpha);
      m.qLo = {0.0, 0.0};
      m.qHi = {1.0, 1.0};
      break;
    case VariantKind::LShape:
      fill_box(m.bPerCell, cell, rc, 0.5, 0.75, alpha - beta);
      break;
  }
  if (!two) {
    m.qLo[1] = 0.0;
    m.qHi[1] = 1.0;
  }
  recompute_bounds(m);
  m.validate();
  return m;
}

std::string to_string(const DefectVariant& v) {
  switch (v.kind) {
    case VariantKind::Value: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "value(%g)", v.betaTilde);
      return buf;
    }
    case VariantKind::Fill: return "fill";
    case VariantKind::Shift: return "shift";
    case VariantKind::LShape: return "lshape";
  }
  return "unknown";
}

DefectVariant parse_variant(const std::string& name, double betaTilde) {
  if (name == "value") return {VariantKind::Value, betaTilde};
  if (name == "fill") return {VariantKind::Fill, 0.0};
  if (name == "shift") return {VariantKind::Shift, 0.0};
  if (name == "lshape") return {VariantKind::LShape, 0.0};
  fail(ErrorKind::Config, "unknown defect variant '" + name + "'");
}

int DefectSample::defectCount() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t cell) {
  const std::uint64_t h = mix64(mix64(mix64(seed) + sample) + cell);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

DefectSample sample_defects(const PeriodicModel& model, const NestedMesh& mesh, std::uint64_t seed,
                            std::uint64_t sampleIndex) {
  if (!(model.p >= 0.0 && model.p <= 1.0)) fail(ErrorKind::Data, "sample_defects: p must lie in [0,1]");
  DefectSample s;
  s.dim = mesh.dim;
  s.nEps = mesh.nEps;
  s.seed = seed;
  s.index = sampleIndex;
  s.p = model.p;
  const int n = mesh.cellCount();
  s.bits.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    s.bits[static_cast<std::size_t>(j)] =
        counter_uniform(seed, sampleIndex, static_cast<std::uint64_t>(j)) < model.p ? 1 : 0;
  return s;
}

double CoefficientField::min() const { return *std::min_element(values.begin(), values.end()); }
double CoefficientField::max() const { return *std::max_element(values.begin(), values.end()); }

CoefficientField realize(const PeriodicModel& model, const DefectSample& sample, const NestedMesh& mesh) {
  if (model.finePerCell != mesh.finePerCell() || model.dim != mesh.dim)
    fail(ErrorKind::Config, "realize: model resolution does not match the mesh");
  if (static_cast<int>(sample.bits.size()) != mesh.cellCount())
    fail(ErrorKind::Data, "realize: sample does not match the defect lattice");
  const Box fine = mesh.fineGrid();
  const Box cellTable = model.cellBox();
  const int rc = model.finePerCell;
  const Box cells = mesh.cellGrid();
  CoefficientField field;
  field.values.resize(static_cast<std::size_t>(fine.size()));
  const double tol = 1e-12 * model.beta;
  for (int e = 0; e < fine.size(); ++e) {
    const Index2 f = fine.coords(e);
    const int k = cellTable.index(f[0] % rc, f[1] % rc);
    const int cell = cells.index(f[0] / rc, f[1] / rc);
    double v = model.aPerCell[static_cast<std::size_t>(k)];
    if (sample.bits[static_cast<std::size_t>(cell)]) v += model.bPerCell[static_cast<std::size_t>(k)];
    if (!(v > 0.0) || v < model.alpha - tol || v > model.beta + tol)
      fail(ErrorKind::Data, "realize: value " + std::to_string(v) + " violates the spectral bounds");
    field.values[static_cast<std::size_t>(e)] = v;
  }
  return field;
}

CoefficientField restrict_to_patch(const CoefficientField& global, const PatchGeometry& patch) {
  CoefficientField out;
  out.values.reserve(patch.fineElements.size());
  for (int e : patch.fineElements) out.values.push_back(global.values[static_cast<std::size_t>(e)]);
  return out;
}

CoefficientField realize_patch(const PeriodicModel& model, const DefectSample& sample, const NestedMesh& mesh,
                               const PatchGeometry& patch) {
  const Box fine = mesh.fineGrid();
  const Box cellTable = model.cellBox();
  const Box cells = mesh.cellGrid();
  const int rc = model.finePerCell;
  CoefficientField out;
  out.values.reserve(patch.fineElements.size());
  for (int e : patch.fineElements) {
    const Index2 f = fine.coords(e);
    const int k = cellTable.index(f[0] % rc, f[1] % rc);
    double v = model.aPerCell[static_cast<std::size_t>(k)];
    if (sample.bits[static_cast<std::size_t>(cells.index(f[0] / rc, f[1] / rc))])
      v += model.bPerCell[static_cast<std::size_t>(k)];
    out.values.push_back(v);
  }
  return out;
}

std::vector<int> OfflineCoefficients::cellElements(int localCell) const {
  const Index2 c = cells.coords(localCell);
  const Box table{{finePerCell, dim == 2 ? finePerCell : 1}};
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(table.size()));
  for (int k1 = 0; k1 < table.n[1]; ++k1)
    for (int k0 = 0; k0 < table.n[0]; ++k0)
      out.push_back(fineElements.index(c[0] * finePerCell + k0, dim == 2 ? c[1] * finePerCell + k1 : 0));
  return out;
}

CoefficientField OfflineCoefficients::coefficient(int i) const {
  if (i < 0 || i > count()) fail(ErrorKind::Data, "offline coefficient index out of range");
  CoefficientField a = base;
  if (i == 0) return a;
  const auto elems = cellElements(i - 1);
  for (std::size_t k = 0; k < elems.size(); ++k) a.values[static_cast<std::size_t>(elems[k])] += bPerCell[k];
  return a;
}

OfflineCoefficients offline_coefficients(const PeriodicModel& model, const NestedMesh& mesh,
                                         const PatchGeometry& reference) {
  if (model.finePerCell != mesh.finePerCell()) fail(ErrorKind::Config, "offline_coefficients: resolution mismatch");
  OfflineCoefficients oc;
  oc.dim = mesh.dim;
  oc.finePerCell = model.finePerCell;
  oc.fineElements = reference.localFineElements();
  oc.cells = reference.localCells();
  oc.bPerCell = model.bPerCell;
  DefectSample none;
  none.bits.assign(static_cast<std::size_t>(mesh.cellCount()), 0);
  oc.base = realize_patch(model, none, mesh, reference);
  return oc;
}

Vec MuWeights::dense() const {
  Vec mu = Vec::Zero(N + 1);
  mu[0] = mu0;
  for (int i : active) mu[i] = 1.0;
  return mu;
}

MuWeights extract_mu(const DefectSample& sample, const PatchGeometry& patch) {
  MuWeights mu;
  const Box cells = patch.localCells();
  mu.N = cells.size();
  for (int c = 0; c < cells.size(); ++c)
    if (sample.bits[static_cast<std::size_t>(patch.globalCell(c, sample.nEps))]) mu.active.push_back(c + 1);
  mu.mu0 = 1.0 - static_cast<double>(mu.active.size());
  return mu;
}

}  // namespace randlod
