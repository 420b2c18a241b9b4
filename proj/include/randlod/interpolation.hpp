#pragma once

#include <string>

#include "randlod/linalg.hpp"
#include "randlod/mesh.hpp"

namespace randlod {

enum class InterpolationKind { AveragedL2, Nodal1d };

InterpolationKind parse_interpolation(const std::string& name);
const char* to_string(InterpolationKind kind);

/// Values of Pi_T at the 2^d corners of one coarse element as a linear map of
/// the (r+1)^d fine nodal values on that element (both orderings x-fastest).
Mat element_projection(int dim, int refinement, InterpolationKind kind);

/// Coarse hat values at the fine nodes of one coarse element: (r+1)^d x 2^d.
Mat element_hats(int dim, int refinement);

/// I_H as a sparse map from fine nodal values to coarse nodal values on the torus.
struct InterpolationMap {
  InterpolationKind kind = InterpolationKind::AveragedL2;
  int dim = 2;
  int refinement = 1;
  Mat elementProjection;
  SparseMatrix matrix;

  Vec apply(const Vec& fine) const { return matrix.multiply(fine); }
};

/// Throws Error(Unsupported) for nodal interpolation in 2D.
InterpolationMap build_interpolation(const NestedMesh& mesh, InterpolationKind kind);

/// Bilinear prolongation from coarse to fine nodes (fine x coarse).
SparseMatrix prolongation(const NestedMesh& mesh);
Vec prolong(const NestedMesh& mesh, const Vec& coarse);

}  // namespace randlod
