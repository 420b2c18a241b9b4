#include "randlod/randlod.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "randlod/error.hpp"
#include "randlod/experiments.hpp"
#include "randlod/online.hpp"
#include "randlod/reference.hpp"

struct randlod_config {
  randlod::CampaignConfig cfg;
  std::string json;
};

struct randlod_database {
  randlod::OfflineDatabase db;
};

struct randlod_table {
  randlod::Table t;
};

namespace {

thread_local std::string g_last_error;

randlod_status record(randlod_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
randlod_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return RANDLOD_OK;
  } catch (const randlod::Error& e) {
    return record(static_cast<randlod_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return record(RANDLOD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(RANDLOD_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(RANDLOD_ERR_INTERNAL, "unknown exception");
  }
}

randlod::RunOptions options(int threads, randlod_log_fn log, void* user) {
  randlod::RunOptions o;
  o.threads = threads;
  if (log) o.log = [log, user](const std::string& s) { log(s.c_str(), user); };
  return o;
}

#define RANDLOD_REQUIRE(cond, what) \
  if (!(cond)) return record(RANDLOD_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* randlod_version(void) { return "1.0.0"; }

uint32_t randlod_database_format_version(void) { return randlod::kDatabaseVersion; }

const char* randlod_status_name(randlod_status status) {
  switch (status) {
    case RANDLOD_OK: return "ok";
    case RANDLOD_ERR_ARGUMENT: return "argument";
    case RANDLOD_ERR_INTERNAL: return "internal";
    default:
      if (status >= RANDLOD_ERR_CONFIG && status <= RANDLOD_ERR_TRUNCATED)
        return randlod::to_string(static_cast<randlod::ErrorKind>(static_cast<int>(status)));
      return "unknown";
  }
}

const char* randlod_last_error(void) { return g_last_error.c_str(); }

randlod_status randlod_config_parse(const char* json, randlod_config** out) {
  RANDLOD_REQUIRE(json && out, "randlod_config_parse: null argument");
  *out = nullptr;
  return guard([&] {
    auto c = std::make_unique<randlod_config>(randlod_config{randlod::parse_config(json), {}});
    c->json = randlod::canonical_json(c->cfg);
    *out = c.release();
  });
}

randlod_status randlod_config_load(const char* path, randlod_config** out) {
  RANDLOD_REQUIRE(path && out, "randlod_config_load: null argument");
  *out = nullptr;
  return guard([&] {
    auto c = std::make_unique<randlod_config>(randlod_config{randlod::load_config(path), {}});
    c->json = randlod::canonical_json(c->cfg);
    *out = c.release();
  });
}

void randlod_config_free(randlod_config* config) { delete config; }

randlod_status randlod_config_set_seed(randlod_config* config, uint64_t seed) {
  RANDLOD_REQUIRE(config, "randlod_config_set_seed: null config");
  return guard([&] {
    config->cfg.seed = seed;
    config->json = randlod::canonical_json(config->cfg);
  });
}

randlod_status randlod_config_hash(const randlod_config* config, uint64_t* out) {
  RANDLOD_REQUIRE(config && out, "randlod_config_hash: null argument");
  return guard([&] { *out = randlod::config_hash(config->cfg); });
}

const char* randlod_config_json(const randlod_config* config) { return config ? config->json.c_str() : ""; }

randlod_status randlod_offline_build(const randlod_config* config, int threads, randlod_log_fn log, void* user,
                                     randlod_database** out) {
  RANDLOD_REQUIRE(config && out, "randlod_offline_build: null argument");
  *out = nullptr;
  return guard([&] { *out = new randlod_database{randlod::campaign_offline(config->cfg, options(threads, log, user))}; });
}

randlod_status randlod_database_save(const randlod_database* db, const char* path) {
  RANDLOD_REQUIRE(db && path, "randlod_database_save: null argument");
  return guard([&] { randlod::save_database(db->db, path); });
}

randlod_status randlod_database_load(const char* path, randlod_database** out) {
  RANDLOD_REQUIRE(path && out, "randlod_database_load: null argument");
  *out = nullptr;
  return guard([&] { *out = new randlod_database{randlod::load_database(path)}; });
}

void randlod_database_free(randlod_database* db) { delete db; }

randlod_status randlod_database_count(const randlod_database* db, int* out) {
  RANDLOD_REQUIRE(db && out, "randlod_database_count: null argument");
  *out = db->db.count();
  return RANDLOD_OK;
}

randlod_status randlod_solve(const randlod_database* db, const randlod_config* config, double p, uint64_t sample,
                             int threads, randlod_table** out) {
  RANDLOD_REQUIRE(db && config && out, "randlod_solve: null argument");
  RANDLOD_REQUIRE(p >= 0.0 && p <= 1.0, "randlod_solve: p outside [0,1]");
  *out = nullptr;
  return guard([&] {
    using namespace randlod;
    const CampaignConfig& c = config->cfg;
    const NestedMesh mesh = campaign_mesh(c);
    PeriodicModel model = campaign_model(c);
    model.p = p;
    const DefectSample s = sample_defects(model, mesh, c.seed, sample);
    CoarseSystem sys = assemble_global(db->db, s, mesh);
    solve_coarse(sys, mesh);
    const ReferenceSolution ref =
        pglod_solve(realize(model, s, mesh), mesh, c.m, campaign_interpolation(c), db->db.load, {false, threads});
    auto t = std::make_unique<randlod_table>();
    t->t.columns = {"node", "x", "y", "coarse", "reference"};
    const Box grid = mesh.coarseGrid();
    for (int k = 0; k < grid.size(); ++k) {
      const Index2 ij = grid.coords(k);
      t->t.add({std::to_string(k), format_number(ij[0] * mesh.H()), format_number(ij[1] * mesh.H()),
                format_number(sys.solution[k]), format_number(ref.coarse[k])});
    }
    *out = t.release();
  });
}

randlod_status randlod_run(const randlod_config* config, randlod_run_kind kind, const randlod_database* db, int threads,
                           randlod_log_fn log, void* user, randlod_table** out) {
  RANDLOD_REQUIRE(config && out, "randlod_run: null argument");
  *out = nullptr;
  return guard([&] {
    const randlod::RunOptions o = options(threads, log, user);
    const randlod::OfflineDatabase* d = db ? &db->db : nullptr;
    auto t = std::make_unique<randlod_table>();
    switch (kind) {
      case RANDLOD_RUN_MC: t->t = randlod::run_mc(config->cfg, d, o); break;
      case RANDLOD_RUN_BASELINE: t->t = randlod::run_deterministic_baseline(config->cfg, d, o); break;
      case RANDLOD_RUN_INDICATOR: t->t = randlod::run_indicator_study(config->cfg, d, o); break;
      case RANDLOD_RUN_ONED: t->t = randlod::run_oned(config->cfg, o); break;
      case RANDLOD_RUN_TIMING: t->t = randlod::run_timing(config->cfg, o).table(); break;
      default: randlod::fail(randlod::ErrorKind::Config, "randlod_run: unknown run kind");
    }
    *out = t.release();
  });
}

size_t randlod_table_rows(const randlod_table* table) { return table ? table->t.rows.size() : 0; }

size_t randlod_table_columns(const randlod_table* table) { return table ? table->t.columns.size() : 0; }

const char* randlod_table_column_name(const randlod_table* table, size_t column) {
  if (!table || column >= table->t.columns.size()) return nullptr;
  return table->t.columns[column].c_str();
}

const char* randlod_table_cell(const randlod_table* table, size_t row, size_t column) {
  if (!table || row >= table->t.rows.size() || column >= table->t.columns.size()) return nullptr;
  return table->t.rows[row][column].c_str();
}

randlod_status randlod_table_write_csv(const randlod_table* table, const char* path) {
  RANDLOD_REQUIRE(table && path, "randlod_table_write_csv: null argument");
  return guard([&] { randlod::write_text(path, table->t.csv()); });
}

void randlod_table_free(randlod_table* table) { delete table; }

}  // extern "C"
