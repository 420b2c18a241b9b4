#pragma once

#include <functional>
#include <vector>

#include "randlod/coefficient.hpp"
#include "randlod/linalg.hpp"
#include "randlod/mesh.hpp"
#include "randlod/offline.hpp"

namespace randlod {

/// sum_i mu_i b_T^i over the nonzero weights only. `touched`, when given,
/// receives the number of stored matrices read (N_def + 1, or N_def if mu_0 = 0).
Mat combine_local(const OfflineDatabase& db, const MuWeights& mu, int* touched = nullptr);
/// Same combination for a dense weight vector of length N+1.
Mat combine_local(const OfflineDatabase& db, const Vec& mu, int* touched = nullptr);

/// Scatter local matrices (rows: corners of T, columns: patch coarse nodes)
/// into K[k, j] += b_T(lambda_j, lambda_k), in (T, j, k) order.
SparseMatrix scatter_local(const NestedMesh& mesh, int m, const std::function<Mat(int T)>& local);

struct CoarseSystem {
  SparseMatrix stiffness;
  Vec load;
  Vec solution;
  double relativeResidual = 0.0;
};

CoarseSystem assemble_global(const OfflineDatabase& db, const DefectSample& sample, const NestedMesh& mesh);

/// Solves K u = F on the zero-mean space with a Lagrange multiplier for the
/// constraint sum_k u_k (lambda_k, 1) = 0. Stores and returns the solution.
const Vec& solve_coarse(CoarseSystem& system, const NestedMesh& mesh);

/// Fine nodal values of prolong(u) - sum_T sum_i mu_i C_{m,T}(A_i) u|_T.
Vec upscale(const OfflineDatabase& db, const DefectSample& sample, const NestedMesh& mesh, const Vec& coarse);

/// Adds -sum_j u(corner j of T) * block(:, j) into a fine nodal vector via the patch node map.
void subtract_corrector(const NestedMesh& mesh, const PatchGeometry& patchT, const Mat& block, const Vec& coarse,
                        Vec& fine);

}  // namespace randlod
