#include "randlod/reference.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "parallel.hpp"
#include "randlod/error.hpp"
#include "randlod/online.hpp"

namespace randlod {

ReferenceSolution pglod_solve(const CoefficientField& aFull, const NestedMesh& mesh, int m, InterpolationKind kind,
                              const Vec& load, const ReferenceOptions& options) {
  if (static_cast<int>(aFull.values.size()) != mesh.fineCount())
    fail(ErrorKind::Data, "pglod_solve: coefficient does not match the fine grid");
  if (load.size() != mesh.coarseCount()) fail(ErrorKind::Data, "pglod_solve: load vector has the wrong size");
  const PatchProblem problem(mesh, m, kind);
  const int n = mesh.coarseCount();

  ReferenceSolution sol;
  sol.localMatrices.resize(static_cast<std::size_t>(n));
  std::vector<Mat> correctors(options.upscale ? static_cast<std::size_t>(n) : 0);
  const int workers = detail::worker_count(options.threads, n);
  std::vector<std::unique_ptr<CorrectorSolver>> solvers(static_cast<std::size_t>(workers));
  detail::parallel_for(n, workers, [&](int T, int w) {
    auto& solver = solvers[static_cast<std::size_t>(w)];
    if (!solver) solver = std::make_unique<CorrectorSolver>(problem);
    const CoefficientField a = restrict_to_patch(aFull, patch(mesh, T, m));
    try {
      CorrectorBasis basis = solver->solve(a);
      sol.localMatrices[static_cast<std::size_t>(T)] = local_stiffness(problem, a, basis);
      if (options.upscale) correctors[static_cast<std::size_t>(T)] = std::move(basis.values);
    } catch (const Error& e) {
      throw Error(e.kind(), "coarse element " + std::to_string(T) + ": " + e.what());
    }
  });

  CoarseSystem sys;
  sys.stiffness = scatter_local(mesh, m, [&](int T) { return sol.localMatrices[static_cast<std::size_t>(T)]; });
  sys.load = load;
  solve_coarse(sys, mesh);
  sol.stiffness = std::move(sys.stiffness);
  sol.coarse = std::move(sys.solution);
  sol.relativeResidual = sys.relativeResidual;

  if (options.upscale) {
    sol.upscaled = prolong(mesh, sol.coarse);
    for (int T = 0; T < n; ++T)
      subtract_corrector(mesh, patch(mesh, T, m), correctors[static_cast<std::size_t>(T)], sol.coarse, sol.upscaled);
  }
  return sol;
}

namespace {

// Q1 assembly on an n^d torus grid; node (i0,i1) of element (e0,e1) is ((e0+a0) mod n, (e1+a1) mod n).
SparseMatrix assemble_torus(int dim, int n, const Mat& element, const CoefficientField* a) {
  const Box grid{{n, dim == 2 ? n : 1}};
  const int corners = dim == 2 ? 4 : 2;
  TripletAccumulator acc(grid.size(), grid.size());
  acc.reserve(static_cast<std::size_t>(grid.size()) * corners * corners);
  for (int e = 0; e < grid.size(); ++e) {
    const Index2 c = grid.coords(e);
    int nodes[4];
    for (int q = 0; q < corners; ++q)
      nodes[q] = grid.index(wrap(c[0] + (q & 1), n), dim == 2 ? wrap(c[1] + (q >> 1), n) : 0);
    const double s = a ? a->values[static_cast<std::size_t>(e)] : 1.0;
    for (int q = 0; q < corners; ++q)
      for (int t = 0; t < corners; ++t) acc.add(nodes[q], nodes[t], s * element(q, t));
  }
  return acc.finalize(true);
}

double quadratic_form(const SparseMatrix& m, const Vec& v) { return v.dot(m.multiply(v)); }

}  // namespace

SparseMatrix coarse_mass(const NestedMesh& mesh) {
  return assemble_torus(mesh.dim, mesh.nH, q1_mass(mesh.dim, mesh.H()), nullptr);
}

SparseMatrix fine_mass(const NestedMesh& mesh) {
  return assemble_torus(mesh.dim, mesh.nh, q1_mass(mesh.dim, mesh.h()), nullptr);
}

SparseMatrix fine_stiffness(const NestedMesh& mesh, const CoefficientField* a) {
  if (a && static_cast<int>(a->values.size()) != mesh.fineCount())
    fail(ErrorKind::Data, "fine_stiffness: coefficient does not match the fine grid");
  return assemble_torus(mesh.dim, mesh.nh, q1_stiffness(mesh.dim, mesh.h()), a);
}

Vec fine_load_vector(const NestedMesh& mesh, const SourceTerm& source) {
  const NestedMesh fine = build_mesh(mesh.dim, mesh.nh, 1, mesh.nh);
  return load_vector(fine, source);
}

Vec fem_fine_solve(const CoefficientField& aFull, const NestedMesh& mesh, const SourceTerm& source) {
  const SparseMatrix K = fine_stiffness(mesh, &aFull);
  const Vec F = fine_load_vector(mesh, source);
  const int n = K.rows;
  TripletAccumulator acc(n + 1, n + 1);
  acc.reserve(static_cast<std::size_t>(K.nonZeros() + 2 * n));
  for (int r = 0; r < n; ++r) {
    for (int p = K.rowPtr[r]; p < K.rowPtr[r + 1]; ++p) acc.add(r, K.colIdx[p], K.values[p]);
    acc.add(r, n, 1.0);
    acc.add(n, r, 1.0);
  }
  Vec rhs = Vec::Zero(n + 1);
  rhs.head(n) = F;
  const SolveReport rep = sparse_solve(acc.finalize(true), rhs, SolveKind::SymmetricIndefinite);
  return rep.solution.head(n);
}

double coarse_l2_norm(const NestedMesh& mesh, const Vec& coarse) {
  return std::sqrt(std::max(0.0, quadratic_form(coarse_mass(mesh), coarse)));
}

double fine_l2_norm(const NestedMesh& mesh, const Vec& fine) {
  return std::sqrt(std::max(0.0, quadratic_form(fine_mass(mesh), fine)));
}

double fine_h1_seminorm(const NestedMesh& mesh, const Vec& fine) {
  return std::sqrt(std::max(0.0, quadratic_form(fine_stiffness(mesh), fine)));
}

RelativeErrors relative_errors(const NestedMesh& mesh, const Vec& refCoarse, const Vec& refUpscaled,
                               const Vec& tildeCoarse, const Vec& tildeUpscaled) {
  if (refCoarse.size() != tildeCoarse.size() || refUpscaled.size() != tildeUpscaled.size())
    fail(ErrorKind::Data, "relative_errors: vector sizes differ");
  RelativeErrors out;
  const SparseMatrix M = coarse_mass(mesh);
  const double l2 = std::sqrt(quadratic_form(M, refCoarse));
  if (!(l2 > 0.0)) fail(ErrorKind::Numeric, "relative_errors: reference coarse solution has zero L2 norm");
  out.absL2 = std::sqrt(std::max(0.0, quadratic_form(M, refCoarse - tildeCoarse)));
  out.relL2 = out.absL2 / l2;
  if (refUpscaled.size() > 0) {
    const SparseMatrix K = fine_stiffness(mesh);
    const double h1 = std::sqrt(quadratic_form(K, refUpscaled));
    if (!(h1 > 0.0)) fail(ErrorKind::Numeric, "relative_errors: reference upscaled solution has zero H1 seminorm");
    out.relH1 = std::sqrt(std::max(0.0, quadratic_form(K, refUpscaled - tildeUpscaled))) / h1;
  }
  return out;
}

}  // namespace randlod
