#pragma once

#include <vector>

#include "randlod/coefficient.hpp"
#include "randlod/corrector.hpp"
#include "randlod/interpolation.hpp"
#include "randlod/linalg.hpp"
#include "randlod/mesh.hpp"
#include "randlod/offline.hpp"

namespace randlod {

struct ReferenceSolution {
  SparseMatrix stiffness;
  Vec coarse;     // u_m^H
  Vec upscaled;   // u_m^ms on the fine nodes (empty unless requested)
  std::vector<Mat> localMatrices;  // b_T per coarse element
  double relativeResidual = 0.0;
};

struct ReferenceOptions {
  bool upscale = true;
  int threads = 1;
};

/// Per-sample PG-LOD with correctors computed from the actual coefficient on every patch.
ReferenceSolution pglod_solve(const CoefficientField& aFull, const NestedMesh& mesh, int m, InterpolationKind kind,
                              const Vec& load, const ReferenceOptions& options = {});

/// Standard Q1 finite elements on the fine torus grid with a zero-mean constraint.
Vec fem_fine_solve(const CoefficientField& aFull, const NestedMesh& mesh, const SourceTerm& source);

/// Fine-grid Q1 load vector, 2-point Gauss per element and axis.
Vec fine_load_vector(const NestedMesh& mesh, const SourceTerm& source);

/// Global Q1 matrices on the coarse or fine torus grid (coefficient 1).
SparseMatrix coarse_mass(const NestedMesh& mesh);
SparseMatrix fine_mass(const NestedMesh& mesh);
SparseMatrix fine_stiffness(const NestedMesh& mesh, const CoefficientField* a = nullptr);

double coarse_l2_norm(const NestedMesh& mesh, const Vec& coarse);
double fine_l2_norm(const NestedMesh& mesh, const Vec& fine);
double fine_h1_seminorm(const NestedMesh& mesh, const Vec& fine);

struct RelativeErrors {
  double relL2 = 0.0;  // coarse solutions
  double relH1 = 0.0;  // upscaled solutions
  double absL2 = 0.0;
};

/// Throws Error(Numeric) when a reference norm vanishes.
RelativeErrors relative_errors(const NestedMesh& mesh, const Vec& refCoarse, const Vec& refUpscaled,
                               const Vec& tildeCoarse, const Vec& tildeUpscaled);

}  // namespace randlod
