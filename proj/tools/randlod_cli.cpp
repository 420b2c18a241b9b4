// Command line front end. Talks to the library through the C API only.
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "randlod/randlod.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seedGiven = false;
  std::string out = "out";
  int threads = 1;
  std::string db;
};

struct Failure {
  randlod_status status;
  std::string what;
};

void check(randlod_status s, const char* where) {
  if (s != RANDLOD_OK) throw Failure{s, std::string(where) + ": " + randlod_last_error()};
}

void log_line(const char* msg, void*) { std::fprintf(stderr, "[randlod] %s\n", msg); }

double now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

class Run {
 public:
  Run(std::string command, const Common& c) : command_(std::move(command)), common_(c), start_(now()) {
    check(randlod_config_load(c.config.c_str(), &cfg_), "config");
    if (c.seedGiven) check(randlod_config_set_seed(cfg_, c.seed), "config");
    fs::create_directories(c.out);
  }
  ~Run() {
    randlod_config_free(cfg_);
    randlod_database_free(db_);
  }
  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  randlod_config* cfg() { return cfg_; }

  // Loads --db when given; otherwise the campaign builds its own database.
  const randlod_database* maybe_db() {
    if (common_.db.empty()) return nullptr;
    const double t0 = now();
    check(randlod_database_load(common_.db.c_str(), &db_), "database");
    times_["load_database"] = now() - t0;
    return db_;
  }

  const randlod_database* need_db() {
    if (maybe_db()) return db_;
    const double t0 = now();
    check(randlod_offline_build(cfg_, common_.threads, log_line, nullptr, &db_), "offline");
    times_["offline"] = now() - t0;
    return db_;
  }

  void set_built(randlod_database* d) { db_ = d; }

  void time(const std::string& phase, double seconds) { times_[phase] = seconds; }

  std::string path(const std::string& file) const { return (fs::path(common_.out) / file).string(); }

  void write_table(randlod_table* t, const std::string& file) {
    const randlod_status s = randlod_table_write_csv(t, path(file).c_str());
    randlod_table_free(t);
    check(s, "write");
    outputs_.push_back(file);
  }

  void add_output(const std::string& file) { outputs_.push_back(file); }

  void manifest() {
    std::uint64_t hash = 0;
    check(randlod_config_hash(cfg_, &hash), "config");
    json m;
    m["command"] = command_;
    m["config_path"] = common_.config;
    m["config"] = json::parse(randlod_config_json(cfg_));
    m["config_hash"] = hex64(hash);
    m["threads"] = common_.threads;
    m["versions"] = {{"library", randlod_version()},
                     {"database_format", randlod_database_format_version()},
                     {"compiler", __VERSION__}};
    times_["total"] = now() - start_;
    m["wall_times_s"] = times_;
    m["outputs"] = outputs_;
    std::ofstream(path(command_ + "_manifest.json")) << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  Common common_;
  double start_;
  randlod_config* cfg_ = nullptr;
  randlod_database* db_ = nullptr;
  std::map<std::string, double> times_;
  std::vector<std::string> outputs_;
};

void add_common(CLI::App* sub, Common& c, bool withDb) {
  sub->add_option("--config", c.config, "campaign config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& s) {
        c.seed = s;
        c.seedGiven = true;
      }, "override the config seed");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads (0: all cores)")->capture_default_str();
  if (withDb) sub->add_option("--db", c.db, "offline database to reuse")->check(CLI::ExistingFile);
}

void campaign(const std::string& name, randlod_run_kind kind, const Common& c, bool usesDb) {
  Run run(name, c);
  const randlod_database* db = usesDb ? run.maybe_db() : nullptr;
  randlod_table* t = nullptr;
  const double t0 = now();
  check(randlod_run(run.cfg(), kind, db, c.threads, log_line, nullptr, &t), name.c_str());
  run.time(name, now() - t0);
  run.write_table(t, name + ".csv");
  run.manifest();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline-online PG-LOD for coefficients with random defects"};
  app.require_subcommand(1);
  Common c;

  auto* offline = app.add_subcommand("offline", "build and save the offline database");
  add_common(offline, c, false);
  auto* solve = app.add_subcommand("solve", "solve one sample online and with the per-sample reference");
  add_common(solve, c, true);
  double p = -1.0;
  std::uint64_t sample = 0;
  solve->add_option("--p", p, "defect probability (default: first p_grid entry)");
  solve->add_option("--sample", sample, "sample index")->capture_default_str();
  auto* mc = app.add_subcommand("mc", "Monte-Carlo errors of the offline-online strategy");
  add_common(mc, c, true);
  auto* baseline = app.add_subcommand("baseline", "Monte-Carlo errors of the deterministic LOD solution");
  add_common(baseline, c, true);
  auto* indicator = app.add_subcommand("indicator", "indicator study on the center element");
  add_common(indicator, c, true);
  auto* oned = app.add_subcommand("oned", "1D harmonic-mean study");
  add_common(oned, c, false);
  auto* timing = app.add_subcommand("timing", "offline/online/naive timings");
  add_common(timing, c, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (offline->parsed()) {
      Run run("offline", c);
      const double t0 = now();
      randlod_database* db = nullptr;
      check(randlod_offline_build(run.cfg(), c.threads, log_line, nullptr, &db), "offline");
      run.set_built(db);
      run.time("offline", now() - t0);
      check(randlod_database_save(db, run.path("offline.lodb").c_str()), "save");
      run.add_output("offline.lodb");
      run.manifest();
    } else if (solve->parsed()) {
      Run run("solve", c);
      const randlod_database* db = run.need_db();
      if (p < 0.0) {
        const json cfg = json::parse(randlod_config_json(run.cfg()));
        p = cfg.at("p_grid").at(0).get<double>();
      }
      randlod_table* t = nullptr;
      const double t0 = now();
      check(randlod_solve(db, run.cfg(), p, sample, c.threads, &t), "solve");
      run.time("solve", now() - t0);
      run.write_table(t, "solve.csv");
      run.manifest();
    } else if (mc->parsed()) {
      campaign("mc", RANDLOD_RUN_MC, c, true);
    } else if (baseline->parsed()) {
      campaign("baseline", RANDLOD_RUN_BASELINE, c, true);
    } else if (indicator->parsed()) {
      campaign("indicator", RANDLOD_RUN_INDICATOR, c, true);
    } else if (oned->parsed()) {
      campaign("oned", RANDLOD_RUN_ONED, c, false);
    } else if (timing->parsed()) {
      campaign("timing", RANDLOD_RUN_TIMING, c, false);
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", randlod_status_name(f.status), f.what.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
