#include "randlod/offline.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include <boost/crc.hpp>

#include "parallel.hpp"
#include "randlod/error.hpp"

namespace randlod {

SourceTerm named_source(const std::string& name, int dim) {
  constexpr double pi = std::numbers::pi;
  SourceTerm s;
  s.name = name;
  if (name == "sine") {
    if (dim == 1)
      s.f = [](double x, double) { return 8.0 * pi * pi * std::sin(2.0 * pi * x); };
    else
      s.f = [](double x, double y) { return 8.0 * pi * pi * std::sin(2.0 * pi * x) * std::cos(2.0 * pi * y); };
  } else if (name == "zero") {
    s.f = [](double, double) { return 0.0; };
  } else {
    fail(ErrorKind::Config, "unknown source term '" + name + "' (expected sine or zero)");
  }
  return s;
}

Vec load_vector(const NestedMesh& mesh, const SourceTerm& source) {
  const int d = mesh.dim;
  const int r = mesh.refinement;
  const double h = mesh.h();
  const Box fine = mesh.fineGrid();
  const Box coarse = mesh.coarseGrid();
  const double g = 0.5 / std::sqrt(3.0);
  const double pts[2] = {0.5 - g, 0.5 + g};
  const double w1 = 0.5 * h;
  const double w = d == 2 ? w1 * w1 : w1;
  const int nq1 = d == 2 ? 2 : 1;

  Vec F = Vec::Zero(mesh.coarseCount());
  for (int e = 0; e < fine.size(); ++e) {
    const Index2 c = fine.coords(e);
    const int T0 = c[0] / r, T1 = c[1] / r;
    for (int q1 = 0; q1 < nq1; ++q1) {
      for (int q0 = 0; q0 < 2; ++q0) {
        const double x = (c[0] + pts[q0]) * h;
        const double y = d == 2 ? (c[1] + pts[q1]) * h : 0.0;
        const double fx = source.f(x, y) * w;
        // local coordinates inside the coarse element
        const double s0 = (c[0] % r + pts[q0]) / r;
        const double s1 = d == 2 ? (c[1] % r + pts[q1]) / r : 0.0;
        const double hx[2] = {1.0 - s0, s0};
        const double hy[2] = {1.0 - s1, s1};
        for (int a = 0; a < (d == 2 ? 4 : 2); ++a) {
          const int i0 = wrap(T0 + (a & 1), mesh.nH);
          const int i1 = d == 2 ? wrap(T1 + (a >> 1), mesh.nH) : 0;
          const double phi = hx[a & 1] * (d == 2 ? hy[a >> 1] : 1.0);
          F[coarse.index(i0, i1)] += fx * phi;
        }
      }
    }
  }
  return F;
}

OfflineDatabase build_offline(const PeriodicModel& model, const NestedMesh& mesh, int m, InterpolationKind kind,
                              const SourceTerm& source, const OfflineOptions& options) {
  model.validate();
  if (model.dim != mesh.dim) fail(ErrorKind::Config, "offline: model and mesh dimensions differ");
  if (model.finePerCell != mesh.finePerCell())
    fail(ErrorKind::Config, "offline: model resolution (" + std::to_string(model.finePerCell) +
                                " fine elements per cell) does not match the mesh (" +
                                std::to_string(mesh.finePerCell()) + ")");
  const PatchProblem problem(mesh, m, kind);

  OfflineDatabase db;
  db.mesh = mesh;
  db.m = m;
  db.interpolation = kind;
  db.model = model;
  db.source = source.name;
  db.coefficients = offline_coefficients(model, mesh, problem.reference());
  db.retainsCorrectors = options.retainCorrectors;

  const int n = db.count() + 1;
  db.localMatrices.resize(static_cast<std::size_t>(n));
  if (db.retainsCorrectors) db.correctorValues.resize(static_cast<std::size_t>(n));

  const int workers = detail::worker_count(options.threads, n);
  std::vector<std::unique_ptr<CorrectorSolver>> solvers(static_cast<std::size_t>(workers));
  detail::parallel_for(n, workers, [&](int i, int w) {
    auto& solver = solvers[static_cast<std::size_t>(w)];
    if (!solver) solver = std::make_unique<CorrectorSolver>(problem);
    try {
      const CoefficientField a = db.coefficients.coefficient(i);
      CorrectorBasis basis = solver->solve(a);
      db.localMatrices[static_cast<std::size_t>(i)] = local_stiffness(problem, a, basis);
      if (db.retainsCorrectors) db.correctorValues[static_cast<std::size_t>(i)] = std::move(basis.values);
    } catch (const Error& e) {
      throw Error(e.kind(), "offline coefficient " + std::to_string(i) + ": " + e.what());
    }
  });

  db.load = load_vector(mesh, source);
  return db;
}

void check_geometry(const OfflineDatabase& db, const NestedMesh& mesh) {
  const NestedMesh& a = db.mesh;
  if (a.dim != mesh.dim || a.nH != mesh.nH || a.refinement != mesh.refinement || a.nEps != mesh.nEps) {
    std::ostringstream s;
    s << "database geometry (d=" << a.dim << ", nH=" << a.nH << ", refinement=" << a.refinement
      << ", nEps=" << a.nEps << ") does not match the mesh (d=" << mesh.dim << ", nH=" << mesh.nH
      << ", refinement=" << mesh.refinement << ", nEps=" << mesh.nEps << ")";
    fail(ErrorKind::Config, s.str());
  }
}

// ---------------------------------------------------------------------------
// Binary format: "LODB", u32 version, fields in declaration order, u64 CRC-64/XZ
// of all preceding bytes. Integers and doubles are little-endian; matrices are
// written as u64 rows, u64 cols, then column-major float64 data.

std::uint64_t crc64(const void* data, std::size_t size) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true> crc;
  crc.process_bytes(data, size);
  return crc.checksum();
}

namespace {

constexpr char kMagic[4] = {'L', 'O', 'D', 'B'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out_.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out_.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  }
  void i32(int v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void mat(const Mat& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    const double* p = m.data();
    for (Eigen::Index k = 0; k < m.size(); ++k) f64(p[k]);
  }
  std::string& buffer() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const char* p, std::size_t n) : p_(p), n_(n) {}
  const char* take(std::size_t k) {
    if (k > n_ - pos_) fail(ErrorKind::Truncated, "database: unexpected end of data at byte " + std::to_string(pos_));
    const char* at = p_ + pos_;
    pos_ += k;
    return at;
  }
  std::uint64_t u64() {
    const auto* b = reinterpret_cast<const unsigned char*>(take(8));
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
    return v;
  }
  std::uint32_t u32() {
    const auto* b = reinterpret_cast<const unsigned char*>(take(4));
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | b[k];
    return v;
  }
  int i32() { return static_cast<int>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    const char* s = take(n);
    return std::string(s, n);
  }
  std::size_t count(std::uint64_t n, std::size_t elementBytes) {
    if (n > (n_ - pos_) / elementBytes)
      fail(ErrorKind::Truncated, "database: declared length exceeds the remaining data");
    return static_cast<std::size_t>(n);
  }
  std::vector<double> doubles() {
    std::vector<double> v(count(u64(), 8));
    for (double& x : v) x = f64();
    return v;
  }
  Mat mat() {
    const std::uint64_t rows = u64(), cols = u64();
    if (cols != 0 && rows > (n_ - pos_) / 8 / cols)
      fail(ErrorKind::Truncated, "database: declared matrix shape exceeds the remaining data");
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    double* p = m.data();
    for (Eigen::Index k = 0; k < m.size(); ++k) p[k] = f64();
    return m;
  }
  std::size_t remaining() const { return n_ - pos_; }

 private:
  const char* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

void format_check(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::Format, "database: " + what);
}

}  // namespace

std::string serialize_database(const OfflineDatabase& db) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(db.formatVersion);
  w.i32(db.mesh.dim);
  w.i32(db.mesh.nH);
  w.i32(db.mesh.refinement);
  w.i32(db.mesh.nEps);
  w.i32(db.m);
  w.i32(static_cast<int>(db.interpolation));

  const PeriodicModel& md = db.model;
  w.str(md.name);
  w.i32(md.dim);
  w.f64(md.alpha);
  w.f64(md.beta);
  w.f64(md.p);
  w.i32(md.finePerCell);
  for (int a = 0; a < 2; ++a) w.f64(md.qLo[a]);
  for (int a = 0; a < 2; ++a) w.f64(md.qHi[a]);
  w.doubles(md.aPerCell);
  w.doubles(md.bPerCell);
  w.str(db.source);

  const OfflineCoefficients& oc = db.coefficients;
  w.i32(oc.fineElements.n[0]);
  w.i32(oc.fineElements.n[1]);
  w.i32(oc.cells.n[0]);
  w.i32(oc.cells.n[1]);
  w.doubles(oc.base.values);

  w.u64(db.localMatrices.size());
  for (const Mat& b : db.localMatrices) w.mat(b);
  w.u32(db.retainsCorrectors ? 1 : 0);
  if (db.retainsCorrectors) {
    w.u64(db.correctorValues.size());
    for (const Mat& c : db.correctorValues) w.mat(c);
  }
  w.mat(db.load);

  std::string& out = w.buffer();
  const std::uint64_t crc = crc64(out.data(), out.size());
  w.u64(crc);
  return std::move(out);
}

OfflineDatabase deserialize_database(const std::string& bytes) {
  if (bytes.size() < 16) fail(ErrorKind::Truncated, "database: file too short (" + std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail(ErrorKind::Format, "database: bad magic bytes");
  Reader head(bytes.data() + 4, 4);
  const std::uint32_t version = head.u32();
  if (version != kDatabaseVersion)
    fail(ErrorKind::Version, "database: file version " + std::to_string(version) + ", reader version " +
                                 std::to_string(kDatabaseVersion));
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes.data() + body, 8);
  const std::uint64_t stored = tail.u64();
  const std::uint64_t actual = crc64(bytes.data(), body);
  if (stored != actual) {
    std::ostringstream s;
    s << "database: checksum mismatch (stored " << std::hex << stored << ", computed " << actual << ")";
    fail(ErrorKind::Checksum, s.str());
  }

  Reader r(bytes.data() + 8, body - 8);
  OfflineDatabase db;
  db.formatVersion = version;
  const int dim = r.i32(), nH = r.i32(), refinement = r.i32(), nEps = r.i32();
  try {
    db.mesh = build_mesh(dim, nH, refinement, nEps);
  } catch (const Error& e) {
    fail(ErrorKind::Format, std::string("database: invalid mesh descriptor: ") + e.what());
  }
  db.m = r.i32();
  format_check(db.m >= 0, "negative patch layer count");
  const int kind = r.i32();
  format_check(kind == 0 || kind == 1, "unknown interpolation kind");
  db.interpolation = static_cast<InterpolationKind>(kind);

  PeriodicModel& md = db.model;
  md.name = r.str();
  md.dim = r.i32();
  md.alpha = r.f64();
  md.beta = r.f64();
  md.p = r.f64();
  md.finePerCell = r.i32();
  for (int a = 0; a < 2; ++a) md.qLo[a] = r.f64();
  for (int a = 0; a < 2; ++a) md.qHi[a] = r.f64();
  md.aPerCell = r.doubles();
  md.bPerCell = r.doubles();
  db.source = r.str();

  OfflineCoefficients& oc = db.coefficients;
  oc.dim = dim;
  oc.finePerCell = md.finePerCell;
  oc.fineElements.n = {r.i32(), r.i32()};
  oc.cells.n = {r.i32(), r.i32()};
  oc.base.values = r.doubles();
  oc.bPerCell = md.bPerCell;

  const PatchGeometry ref = db.reference();
  const int N = ref.localCells().size();
  const int corners = dim == 2 ? 4 : 2;
  format_check(md.dim == dim && md.finePerCell == db.mesh.finePerCell(), "model does not match the mesh");
  format_check(static_cast<int>(md.aPerCell.size()) == md.cellBox().size() &&
                   md.bPerCell.size() == md.aPerCell.size(),
               "cell tables have the wrong size");
  format_check(oc.cells.size() == N && oc.fineElements.size() == ref.localFineElements().size() &&
                   static_cast<int>(oc.base.values.size()) == oc.fineElements.size(),
               "offline coefficient shapes do not match the reference patch");

  const std::size_t nm = r.count(r.u64(), 16);
  format_check(static_cast<int>(nm) == N + 1, "expected " + std::to_string(N + 1) + " local matrices");
  db.localMatrices.resize(nm);
  for (Mat& b : db.localMatrices) {
    b = r.mat();
    format_check(b.rows() == corners && b.cols() == ref.localCoarseNodes().size(), "local matrix has the wrong shape");
  }
  const std::uint32_t retained = r.u32();
  format_check(retained <= 1, "bad corrector flag");
  db.retainsCorrectors = retained == 1;
  if (db.retainsCorrectors) {
    const std::size_t nc = r.count(r.u64(), 16);
    format_check(nc == nm, "corrector count differs from matrix count");
    db.correctorValues.resize(nc);
    for (Mat& c : db.correctorValues) {
      c = r.mat();
      format_check(c.rows() == ref.localFineNodes().size() && c.cols() == corners, "corrector block has the wrong shape");
    }
  }
  const Mat load = r.mat();
  format_check(load.rows() == db.mesh.coarseCount() && load.cols() == 1, "load vector has the wrong shape");
  db.load = load.col(0);
  format_check(r.remaining() == 0, "trailing bytes before the checksum");
  return db;
}

void save_database(const OfflineDatabase& db, const std::string& path) {
  const std::string bytes = serialize_database(db);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

OfflineDatabase load_database(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_database(buf.str());
}

}  // namespace randlod
