#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace randlod {

using Index2 = std::array<int, 2>;

/// Lexicographic (x-fastest) box of extents; axis 1 has extent 1 in 1D.
struct Box {
  Index2 n{1, 1};
  int size() const { return n[0] * n[1]; }
  int index(int i0, int i1) const { return i0 + n[0] * i1; }
  int index(Index2 i) const { return index(i[0], i[1]); }
  Index2 coords(int idx) const { return {idx % n[0], idx / n[0]}; }
};

inline int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

/// Nested coarse/fine/defect-cell grids on the unit torus [0,1]^d, d in {1,2}.
/// On the torus, node and element counts per axis coincide.
struct NestedMesh {
  int dim = 2;
  int nH = 0;          // coarse elements per axis
  int refinement = 1;  // fine elements per coarse element per axis
  int nh = 0;          // fine elements per axis
  int nEps = 0;        // defect cells per axis

  double H() const { return 1.0 / nH; }
  double h() const { return 1.0 / nh; }
  double eps() const { return 1.0 / nEps; }
  int cellsPerElement() const { return nEps / nH; }
  int finePerCell() const { return nh / nEps; }

  Box coarseGrid() const { return axes(nH); }
  Box fineGrid() const { return axes(nh); }
  Box cellGrid() const { return axes(nEps); }
  Box axes(int n) const { return Box{{n, dim == 2 ? n : 1}}; }

  int coarseCount() const { return coarseGrid().size(); }
  int fineCount() const { return fineGrid().size(); }
  int cellCount() const { return cellGrid().size(); }

  /// Fine elements contained in coarse element T, lexicographic in local offsets.
  std::vector<int> fineElementsOf(int T) const;
  /// Defect cell containing fine element e.
  int cellOfFine(int e) const;
};

/// Throws Error(Config) naming the violated divisibility constraint.
NestedMesh build_mesh(int dim, int nH, int refinement, int nEps);

/// m-layer element patch U_m(T) on the torus, expressed in local box
/// coordinates. Local element (a0,a1) maps to global ((start + a) mod nH).
/// When 2m+1 > nH the patch is the whole torus and `periodic` is set: local
/// indices then wrap and the patch has no boundary.
struct PatchGeometry {
  int dim = 2;
  int m = 0;
  int center = 0;
  bool periodic = false;
  int elementsPerAxis = 1;
  int refinement = 1;
  int cellsPerElement = 1;
  int nH = 1;
  Index2 start{0, 0};        // global coarse coords of local element (0,0)
  Index2 shift{0, 0};        // translation of the reference patch (centered at element 0)
  Index2 centerLocal{0, 0};  // local coarse coords of the center element

  std::vector<int> coarseElements;  // local lexicographic order
  std::vector<int> fineElements;
  std::vector<int> coarseNodes;
  std::vector<int> fineNodes;
  std::vector<std::uint8_t> fineBoundary;  // one flag per local fine node

  Box localCoarseElements() const { return axes(elementsPerAxis); }
  Box localFineElements() const { return axes(elementsPerAxis * refinement); }
  Box localCoarseNodes() const { return axes(periodic ? elementsPerAxis : elementsPerAxis + 1); }
  Box localFineNodes() const {
    return axes(periodic ? elementsPerAxis * refinement : elementsPerAxis * refinement + 1);
  }
  Box localCells() const { return axes(elementsPerAxis * cellsPerElement); }
  Box axes(int n) const { return Box{{n, dim == 2 ? n : 1}}; }

  /// Local index of a fine node given (possibly out-of-range) local coords; wraps when periodic.
  int fineNodeLocal(int i0, int i1) const;
  /// Global defect cell of a local cell index.
  int globalCell(int localCell, int nEps) const;
};

PatchGeometry patch(const NestedMesh& mesh, int T, int m);

}  // namespace randlod
