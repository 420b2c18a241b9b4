#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "randlod/coefficient.hpp"
#include "randlod/corrector.hpp"
#include "randlod/interpolation.hpp"
#include "randlod/linalg.hpp"
#include "randlod/mesh.hpp"

namespace randlod {

/// Named right-hand side f on the torus.
struct SourceTerm {
  std::string name;
  std::function<double(double, double)> f;
};

/// "sine": 8 pi^2 sin(2 pi x) in 1D, 8 pi^2 sin(2 pi x1) cos(2 pi x2) in 2D.
/// "zero": f = 0.
SourceTerm named_source(const std::string& name, int dim);

/// F(lambda_k) for every coarse node, composite 2-point Gauss per fine element and axis.
Vec load_vector(const NestedMesh& mesh, const SourceTerm& source);

inline constexpr std::uint32_t kDatabaseVersion = 1;

/// Precomputed data for the reference element T = 0. Corrector gradients are
/// not stored: they are elementwise differences of the nodal values.
struct OfflineDatabase {
  std::uint32_t formatVersion = kDatabaseVersion;
  NestedMesh mesh;
  int m = 0;
  InterpolationKind interpolation = InterpolationKind::AveragedL2;
  PeriodicModel model;
  std::string source;
  OfflineCoefficients coefficients;
  std::vector<Mat> localMatrices;  // b_T^i, i = 0..N
  bool retainsCorrectors = false;
  std::vector<Mat> correctorValues;  // C_{m,T}(A_i) lambda_j on the local fine nodes
  Vec load;

  int count() const { return coefficients.count(); }
  PatchGeometry reference() const { return patch(mesh, 0, m); }
};

struct OfflineOptions {
  bool retainCorrectors = true;
  int threads = 1;
};

OfflineDatabase build_offline(const PeriodicModel& model, const NestedMesh& mesh, int m, InterpolationKind kind,
                              const SourceTerm& source, const OfflineOptions& options = {});

/// Throws Error(Config) unless the database was built for this mesh.
void check_geometry(const OfflineDatabase& db, const NestedMesh& mesh);

std::string serialize_database(const OfflineDatabase& db);
OfflineDatabase deserialize_database(const std::string& bytes);
void save_database(const OfflineDatabase& db, const std::string& path);
OfflineDatabase load_database(const std::string& path);

/// CRC-64/XZ of a byte range.
std::uint64_t crc64(const void* data, std::size_t size);

}  // namespace randlod
