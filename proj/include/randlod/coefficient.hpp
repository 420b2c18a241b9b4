#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "randlod/linalg.hpp"
#include "randlod/mesh.hpp"

namespace randlod {

/// Periodic part plus defect part of a weakly random coefficient, tabulated at
/// fine resolution on a single defect cell. A realization on a fine element e
/// inside cell j is aPerCell(e) + bit_j * bPerCell(e).
struct PeriodicModel {
  std::string name;  // "checkerboard", "inclusion", or a variant tag
  int dim = 2;
  double alpha = 1.0;  // realizable lower bound
  double beta = 1.0;   // realizable upper bound
  int finePerCell = 1;
  std::vector<double> aPerCell;
  std::vector<double> bPerCell;
  std::array<double, 2> qLo{0.0, 0.0};  // defect box Q in cell coordinates
  std::array<double, 2> qHi{1.0, 1.0};
  double p = 0.0;

  Box cellBox() const { return Box{{finePerCell, dim == 2 ? finePerCell : 1}}; }
  double qMeasure() const;
  /// Throws Error(Data) if the tables are inconsistent with the bounds or Q.
  void validate() const;
};

/// A_per = alpha, B_per = beta - alpha on the whole cell.
PeriodicModel checkerboard_model(int dim, double alpha, double beta, int finePerCell);
/// Background alpha with inclusion beta on [0.25,0.75]^d; a defect erases the inclusion.
PeriodicModel inclusion_model(int dim, double alpha, double beta, int finePerCell);

enum class VariantKind { Value, Fill, Shift, LShape };

struct DefectVariant {
  VariantKind kind = VariantKind::Value;
  double betaTilde = 1.0;  // only for Value
};

/// Redefines Q and B_per of an inclusion model; bounds are recomputed from the tables.
PeriodicModel defect_variant(const PeriodicModel& inclusion, const DefectVariant& variant);
std::string to_string(const DefectVariant& v);
DefectVariant parse_variant(const std::string& name, double betaTilde);

/// Bernoulli realization: one bit per defect cell of the torus.
struct DefectSample {
  int dim = 2;
  int nEps = 0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  double p = 0.0;
  std::vector<std::uint8_t> bits;

  int defectCount() const;
};

/// Uniform variate in [0,1) from a counter-based hash of (seed, sample, cell).
double counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t cell);

DefectSample sample_defects(const PeriodicModel& model, const NestedMesh& mesh, std::uint64_t seed,
                            std::uint64_t sampleIndex);

/// Elementwise-constant values on the fine elements of a mesh or a patch.
struct CoefficientField {
  std::vector<double> values;
  double min() const;
  double max() const;
};

CoefficientField realize(const PeriodicModel& model, const DefectSample& sample, const NestedMesh& mesh);
CoefficientField restrict_to_patch(const CoefficientField& global, const PatchGeometry& patch);
CoefficientField realize_patch(const PeriodicModel& model, const DefectSample& sample, const NestedMesh& mesh,
                               const PatchGeometry& patch);

/// Offline coefficients A_0..A_N on a reference patch, stored as A_0 plus the
/// single-cell increment. A_i (i >= 1) adds B_per in local cell sigma(i) = i-1
/// (lexicographic over the patch's cells).
struct OfflineCoefficients {
  int dim = 2;
  int finePerCell = 1;
  Box fineElements;  // local fine-element box of the patch
  Box cells;         // local cell box of the patch
  CoefficientField base;
  std::vector<double> bPerCell;

  int count() const { return cells.size(); }  // N
  /// Local fine elements of a local cell, in cell-table order.
  std::vector<int> cellElements(int localCell) const;
  CoefficientField coefficient(int i) const;
};

OfflineCoefficients offline_coefficients(const PeriodicModel& model, const NestedMesh& mesh,
                                         const PatchGeometry& reference);

/// Affine weights expressing a patch realization through offline coefficients.
/// Only the unit weights (mu_i = 1, i >= 1) are stored; mu_0 = 1 - N_def.
struct MuWeights {
  int N = 0;
  double mu0 = 1.0;
  std::vector<int> active;  // ascending offline indices i >= 1

  int defects() const { return static_cast<int>(active.size()); }
  double sum() const { return mu0 + static_cast<double>(active.size()); }
  Vec dense() const;
};

MuWeights extract_mu(const DefectSample& sample, const PatchGeometry& patch);

}  // namespace randlod
