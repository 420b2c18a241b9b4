#include "randlod/interpolation.hpp"

#include "randlod/error.hpp"

namespace randlod {

namespace {

// 1D projection onto P1 of a fine P1 function on [0,1] with r elements.
Mat projection_1d(int r, InterpolationKind kind) {
  Mat p = Mat::Zero(2, r + 1);
  if (kind == InterpolationKind::Nodal1d) {
    p(0, 0) = 1.0;
    p(1, r) = 1.0;
    return p;
  }
  // moments b_a,k = int phi_a psi_k, Simpson per fine element (integrand is quadratic)
  Mat b = Mat::Zero(2, r + 1);
  const double h = 1.0 / r;
  auto phi = [](int a, double x) { return a == 0 ? 1.0 - x : x; };
  for (int i = 0; i < r; ++i) {
    const double x0 = i * h, xm = (i + 0.5) * h, x1 = (i + 1) * h;
    for (int a = 0; a < 2; ++a) {
      b(a, i) += h / 6.0 * (phi(a, x0) + 2.0 * phi(a, xm));
      b(a, i + 1) += h / 6.0 * (2.0 * phi(a, xm) + phi(a, x1));
    }
  }
  Eigen::Matrix2d m;
  m << 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0;
  p = m.inverse() * b;
  return p;
}

}  // namespace

InterpolationKind parse_interpolation(const std::string& name) {
  if (name == "averagedL2" || name == "averaged") return InterpolationKind::AveragedL2;
  if (name == "nodal1d" || name == "nodal") return InterpolationKind::Nodal1d;
  fail(ErrorKind::Config, "unknown interpolation kind '" + name + "'");
}

const char* to_string(InterpolationKind kind) {
  return kind == InterpolationKind::AveragedL2 ? "averagedL2" : "nodal1d";
}

Mat element_projection(int dim, int refinement, InterpolationKind kind) {
  if (kind == InterpolationKind::Nodal1d && dim != 1)
    fail(ErrorKind::Unsupported, "nodal interpolation is only available in 1D");
  const Mat p1 = projection_1d(refinement, kind);
  if (dim == 1) return p1;
  const int n = refinement + 1;
  Mat p(4, n * n);
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a0 = 0; a0 < 2; ++a0)
      for (int k1 = 0; k1 < n; ++k1)
        for (int k0 = 0; k0 < n; ++k0) p(a0 + 2 * a1, k0 + n * k1) = p1(a0, k0) * p1(a1, k1);
  return p;
}

Mat element_hats(int dim, int refinement) {
  const int n = refinement + 1;
  auto hat = [&](int a, int k) { return a == 0 ? 1.0 - double(k) / refinement : double(k) / refinement; };
  if (dim == 1) {
    Mat out(n, 2);
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < 2; ++a) out(k, a) = hat(a, k);
    return out;
  }
  Mat out(n * n, 4);
  for (int k1 = 0; k1 < n; ++k1)
    for (int k0 = 0; k0 < n; ++k0)
      for (int a1 = 0; a1 < 2; ++a1)
        for (int a0 = 0; a0 < 2; ++a0) out(k0 + n * k1, a0 + 2 * a1) = hat(a0, k0) * hat(a1, k1);
  return out;
}

InterpolationMap build_interpolation(const NestedMesh& mesh, InterpolationKind kind) {
  InterpolationMap map;
  map.kind = kind;
  map.dim = mesh.dim;
  map.refinement = mesh.refinement;
  map.elementProjection = element_projection(mesh.dim, mesh.refinement, kind);
  const int r = mesh.refinement;
  const int corners = mesh.dim == 2 ? 4 : 2;
  const double weight = 1.0 / corners;
  const Box coarse = mesh.coarseGrid();
  const Box fine = mesh.fineGrid();
  const Box local = mesh.axes(r + 1);
  TripletAccumulator acc(mesh.coarseCount(), mesh.fineCount());
  acc.reserve(static_cast<std::size_t>(mesh.coarseCount()) * corners * local.size());
  for (int T = 0; T < coarse.size(); ++T) {
    const Index2 t = coarse.coords(T);
    for (int c = 0; c < corners; ++c) {
      const int z = coarse.index(wrap(t[0] + (c & 1), mesh.nH), mesh.dim == 2 ? wrap(t[1] + (c >> 1), mesh.nH) : 0);
      for (int k = 0; k < local.size(); ++k) {
        const double v = map.elementProjection(c, k);
        if (v == 0.0) continue;
        const Index2 o = local.coords(k);
        const int f = fine.index(wrap(t[0] * r + o[0], mesh.nh), mesh.dim == 2 ? wrap(t[1] * r + o[1], mesh.nh) : 0);
        acc.add(z, f, weight * v);
      }
    }
  }
  map.matrix = acc.finalize();
  return map;
}

SparseMatrix prolongation(const NestedMesh& mesh) {
  const int r = mesh.refinement;
  const Mat hats = element_hats(mesh.dim, r);
  const int corners = mesh.dim == 2 ? 4 : 2;
  const Box coarse = mesh.coarseGrid();
  const Box fine = mesh.fineGrid();
  const Box local = mesh.axes(r + 1);
  TripletAccumulator acc(mesh.fineCount(), mesh.coarseCount());
  for (int f = 0; f < fine.size(); ++f) {
    const Index2 g = fine.coords(f);
    const Index2 t{g[0] / r, g[1] / r};
    const int k = local.index(g[0] % r, g[1] % r);
    for (int c = 0; c < corners; ++c) {
      const double v = hats(k, c);
      if (v == 0.0) continue;
      const int z = coarse.index(wrap(t[0] + (c & 1), mesh.nH), mesh.dim == 2 ? wrap(t[1] + (c >> 1), mesh.nH) : 0);
      acc.add(f, z, v);
    }
  }
  return acc.finalize();
}

Vec prolong(const NestedMesh& mesh, const Vec& coarse) { return prolongation(mesh).multiply(coarse); }

}  // namespace randlod
