#include "randlod/mesh.hpp"

#include <string>

#include "randlod/error.hpp"

namespace randlod {

NestedMesh build_mesh(int dim, int nH, int refinement, int nEps) {
  if (dim != 1 && dim != 2) fail(ErrorKind::Config, "mesh: dimension must be 1 or 2, got " + std::to_string(dim));
  if (nH < 2) fail(ErrorKind::Config, "mesh: nH must be at least 2, got " + std::to_string(nH));
  if (refinement < 1) fail(ErrorKind::Config, "mesh: refinement must be at least 1");
  if (nEps < 1 || nEps % nH != 0)
    fail(ErrorKind::Config, "mesh: nEps (" + std::to_string(nEps) + ") must be a multiple of nH (" +
                                std::to_string(nH) + ")");
  const int nh = nH * refinement;
  if (nh % nEps != 0)
    fail(ErrorKind::Config, "mesh: nh = nH*refinement (" + std::to_string(nh) + ") must be a multiple of nEps (" +
                                std::to_string(nEps) + ")");
  NestedMesh mesh;
  mesh.dim = dim;
  mesh.nH = nH;
  mesh.refinement = refinement;
  mesh.nh = nh;
  mesh.nEps = nEps;
  return mesh;
}

std::vector<int> NestedMesh::fineElementsOf(int T) const {
  const Index2 t = coarseGrid().coords(T);
  const Box local = axes(refinement);
  const Box fine = fineGrid();
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(local.size()));
  for (int j1 = 0; j1 < local.n[1]; ++j1)
    for (int j0 = 0; j0 < local.n[0]; ++j0)
      out.push_back(fine.index(t[0] * refinement + j0, dim == 2 ? t[1] * refinement + j1 : 0));
  return out;
}

int NestedMesh::cellOfFine(int e) const {
  const Index2 f = fineGrid().coords(e);
  const int r = finePerCell();
  return cellGrid().index(f[0] / r, f[1] / r);
}

int PatchGeometry::fineNodeLocal(int i0, int i1) const {
  const Box b = localFineNodes();
  if (periodic) return b.index(wrap(i0, b.n[0]), wrap(i1, b.n[1]));
  return b.index(i0, i1);
}

int PatchGeometry::globalCell(int localCell, int nEps) const {
  const Index2 c = localCells().coords(localCell);
  const int g0 = wrap(start[0] * cellsPerElement + c[0], nEps);
  const int g1 = dim == 2 ? wrap(start[1] * cellsPerElement + c[1], nEps) : 0;
  return g0 + nEps * g1;
}

PatchGeometry patch(const NestedMesh& mesh, int T, int m) {
  if (m < 0) fail(ErrorKind::Config, "patch: m must be nonnegative");
  PatchGeometry p;
  p.dim = mesh.dim;
  p.m = m;
  p.center = T;
  p.nH = mesh.nH;
  p.refinement = mesh.refinement;
  p.cellsPerElement = mesh.cellsPerElement();
  p.periodic = 2 * m + 1 > mesh.nH;
  p.elementsPerAxis = p.periodic ? mesh.nH : 2 * m + 1;

  const Box coarse = mesh.coarseGrid();
  const Index2 t = coarse.coords(T);
  p.shift = t;
  for (int a = 0; a < 2; ++a) {
    const bool active = a == 0 || mesh.dim == 2;
    p.start[a] = active ? wrap(t[a] - m, mesh.nH) : 0;
    p.centerLocal[a] = active ? wrap(t[a] - p.start[a], mesh.nH) : 0;
  }

  const int r = mesh.refinement;
  const Box fine = mesh.fineGrid();
  auto gc = [&](int a, int local) { return (a == 0 || mesh.dim == 2) ? wrap(p.start[a] + local, mesh.nH) : 0; };
  auto gf = [&](int a, int local) {
    return (a == 0 || mesh.dim == 2) ? wrap(p.start[a] * r + local, mesh.nh) : 0;
  };

  const Box ce = p.localCoarseElements();
  for (int i1 = 0; i1 < ce.n[1]; ++i1)
    for (int i0 = 0; i0 < ce.n[0]; ++i0) p.coarseElements.push_back(coarse.index(gc(0, i0), gc(1, i1)));

  const Box cn = p.localCoarseNodes();
  for (int i1 = 0; i1 < cn.n[1]; ++i1)
    for (int i0 = 0; i0 < cn.n[0]; ++i0) p.coarseNodes.push_back(coarse.index(gc(0, i0), gc(1, i1)));

  const Box fe = p.localFineElements();
  for (int i1 = 0; i1 < fe.n[1]; ++i1)
    for (int i0 = 0; i0 < fe.n[0]; ++i0) p.fineElements.push_back(fine.index(gf(0, i0), gf(1, i1)));

  const Box fn = p.localFineNodes();
  for (int i1 = 0; i1 < fn.n[1]; ++i1) {
    for (int i0 = 0; i0 < fn.n[0]; ++i0) {
      p.fineNodes.push_back(fine.index(gf(0, i0), gf(1, i1)));
      bool boundary = false;
      if (!p.periodic) {
        boundary = i0 == 0 || i0 == fn.n[0] - 1;
        if (mesh.dim == 2) boundary = boundary || i1 == 0 || i1 == fn.n[1] - 1;
      }
      p.fineBoundary.push_back(boundary ? 1 : 0);
    }
  }
  return p;
}

}  // namespace randlod
