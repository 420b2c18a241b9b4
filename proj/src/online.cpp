#include "randlod/online.hpp"

#include <string>

#include "randlod/error.hpp"
#include "randlod/interpolation.hpp"

namespace randlod {

Mat combine_local(const OfflineDatabase& db, const MuWeights& mu, int* touched) {
  if (mu.N != db.count())
    fail(ErrorKind::Data, "combine_local: weight vector has " + std::to_string(mu.N + 1) + " entries, database has " +
                              std::to_string(db.count() + 1) + " matrices");
  int n = 0;
  Mat out = Mat::Zero(db.localMatrices[0].rows(), db.localMatrices[0].cols());
  if (mu.mu0 != 0.0) {
    out = mu.mu0 * db.localMatrices[0];
    ++n;
  }
  for (int i : mu.active) {
    out += db.localMatrices[static_cast<std::size_t>(i)];
    ++n;
  }
  if (touched) *touched = n;
  return out;
}

Mat combine_local(const OfflineDatabase& db, const Vec& mu, int* touched) {
  if (mu.size() != db.count() + 1)
    fail(ErrorKind::Data, "combine_local: weight vector has " + std::to_string(mu.size()) + " entries, database has " +
                              std::to_string(db.count() + 1) + " matrices");
  int n = 0;
  Mat out = Mat::Zero(db.localMatrices[0].rows(), db.localMatrices[0].cols());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0.0) continue;
    out += mu[i] * db.localMatrices[static_cast<std::size_t>(i)];
    ++n;
  }
  if (touched) *touched = n;
  return out;
}

namespace {

int corner_node(const NestedMesh& mesh, int T, int a) {
  const Box coarse = mesh.coarseGrid();
  const Index2 t = coarse.coords(T);
  return coarse.index(wrap(t[0] + (a & 1), mesh.nH), mesh.dim == 2 ? wrap(t[1] + (a >> 1), mesh.nH) : 0);
}

}  // namespace

SparseMatrix scatter_local(const NestedMesh& mesh, int m, const std::function<Mat(int T)>& local) {
  const int n = mesh.coarseCount();
  const int corners = mesh.dim == 2 ? 4 : 2;
  TripletAccumulator acc(n, n);
  for (int T = 0; T < n; ++T) {
    const PatchGeometry p = patch(mesh, T, m);
    const Mat b = local(T);
    if (b.rows() != corners || b.cols() != static_cast<Eigen::Index>(p.coarseNodes.size()))
      fail(ErrorKind::Data, "scatter_local: local matrix of element " + std::to_string(T) + " has the wrong shape");
    for (int j = 0; j < corners; ++j) {
      const int col = corner_node(mesh, T, j);
      for (int k = 0; k < b.cols(); ++k) acc.add(p.coarseNodes[static_cast<std::size_t>(k)], col, b(j, k));
    }
  }
  return acc.finalize();
}

CoarseSystem assemble_global(const OfflineDatabase& db, const DefectSample& sample, const NestedMesh& mesh) {
  check_geometry(db, mesh);
  if (static_cast<int>(sample.bits.size()) != mesh.cellCount())
    fail(ErrorKind::Data, "assemble_global: sample does not match the defect lattice");
  CoarseSystem sys;
  sys.stiffness = scatter_local(mesh, db.m, [&](int T) { return combine_local(db, extract_mu(sample, patch(mesh, T, db.m))); });
  sys.load = db.load;
  return sys;
}

const Vec& solve_coarse(CoarseSystem& system, const NestedMesh& mesh) {
  const SparseMatrix& K = system.stiffness;
  const int n = K.rows;
  if (n != mesh.coarseCount() || system.load.size() != n)
    fail(ErrorKind::Data, "solve_coarse: system size does not match the mesh");
  // All coarse hats have the same integral, so the mean constraint is sum_k u_k = 0.
  TripletAccumulator acc(n + 1, n + 1);
  acc.reserve(static_cast<std::size_t>(K.nonZeros() + 2 * n));
  for (int r = 0; r < n; ++r) {
    for (int p = K.rowPtr[r]; p < K.rowPtr[r + 1]; ++p) acc.add(r, K.colIdx[p], K.values[p]);
    acc.add(r, n, 1.0);
    acc.add(n, r, 1.0);
  }
  const SparseMatrix aug = acc.finalize();
  Vec rhs = Vec::Zero(n + 1);
  rhs.head(n) = system.load;
  SolveReport rep;
  try {
    rep = sparse_solve(aug, rhs, SolveKind::General);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("coarse system: ") + e.what());
  }
  system.solution = rep.solution.head(n);
  system.relativeResidual = rep.relativeResidual;
  return system.solution;
}

void subtract_corrector(const NestedMesh& mesh, const PatchGeometry& patchT, const Mat& block, const Vec& coarse,
                        Vec& fine) {
  const int corners = mesh.dim == 2 ? 4 : 2;
  Vec u(corners);
  for (int j = 0; j < corners; ++j) u[j] = coarse[corner_node(mesh, patchT.center, j)];
  const Vec c = block * u;
  for (std::size_t q = 0; q < patchT.fineNodes.size(); ++q) fine[patchT.fineNodes[q]] -= c[static_cast<Eigen::Index>(q)];
}

Vec upscale(const OfflineDatabase& db, const DefectSample& sample, const NestedMesh& mesh, const Vec& coarse) {
  check_geometry(db, mesh);
  if (!db.retainsCorrectors) fail(ErrorKind::Capability, "upscale: database was built without corrector values");
  if (coarse.size() != mesh.coarseCount()) fail(ErrorKind::Data, "upscale: coarse vector has the wrong size");
  Vec fine = prolong(mesh, coarse);
  for (int T = 0; T < mesh.coarseCount(); ++T) {
    const PatchGeometry p = patch(mesh, T, db.m);
    const MuWeights mu = extract_mu(sample, p);
    Mat block = mu.mu0 * db.correctorValues[0];
    for (int i : mu.active) block += db.correctorValues[static_cast<std::size_t>(i)];
    subtract_corrector(mesh, p, block, coarse, fine);
  }
  return fine;
}

}  // namespace randlod
