#ifndef ROMUQ_STUDY_HPP
#define ROMUQ_STUDY_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "romuq/bayes.hpp"
#include "romuq/io.hpp"
#include "romuq/rom.hpp"
#include "romuq/uq.hpp"

namespace romuq
{

// One probe point/component observed at several time steps; each step is an
// independent scalar QoI.
struct QoiProbeConfig
{
  Probe base;              // step ignored here
  std::vector<int> steps;  // 1-based
};

// Study-wide configuration, one JSON document per study. Command line flags
// override individual fields; see tools/ for the precedence rules.
struct StudyConfig
{
  std::filesystem::path output_dir = "study";
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = hardware concurrency

  ParameterSpace space;
  json mesh_doc;
  FomConfig fom;

  Index num_samples = 50;
  double train_fraction = 0.8;

  PodCriterion pod_criterion = PodCriterion::energy(5e-4);
  std::vector<double> pod_table_tolerances = {1e-3, 5e-4, 1e-4, 5e-5, 1e-5};

  std::string rom_variant = "global";  // default for --variant-less runs
  double svd_tolerance = 1e-2;
  // Global variant: hyperparameters are estimated on every stride-th time
  // step, the posterior is then fitted on the full grid.
  Index time_stride = 1;
  GpConfig gp;
  std::optional<GpConfig> td_gp;  // TD-variant override, defaults to gp

  std::vector<QoiProbeConfig> probes;

  int morris_trajectories = 20;
  int morris_levels = 6;

  Index sobol_samples = 256;
  bool sobol_per_step = false;

  McmcConfig mcmc;
  double mcmc_noise_variance = 1e-6;
  Vector mcmc_target;
  std::optional<ParameterSpace> mcmc_prior;  // defaults to the full space

  json raw;  // source document, used for stage fingerprints

  static StudyConfig from_json(const json &doc);
  static StudyConfig from_file(const std::filesystem::path &path);
  Mesh make_mesh() const;
};

struct StageResult
{
  std::filesystem::path dir;
  bool skipped = false;  // unchanged inputs, nothing re-run
  json manifest;
};

// Pipeline stages. Each writes its artifacts plus manifest.json (deterministic,
// carries seed and config hash) and timings.json (excluded from hashing), and
// is a no-op when re-run with unchanged inputs.
StageResult cmd_snapshots(const StudyConfig &config);
StageResult cmd_pod(const StudyConfig &config);
StageResult cmd_train(const StudyConfig &config, const std::string &variant);
StageResult cmd_evaluate(const StudyConfig &config, const std::string &variant);
// model is "fom", "rom:global" or "rom:td".
StageResult cmd_morris(const StudyConfig &config, const std::string &model);
StageResult cmd_sobol(const StudyConfig &config, const std::string &model);
StageResult cmd_mcmc(const StudyConfig &config, const std::string &model);
StageResult cmd_report(const StudyConfig &config);

// ---------------------------------------------------------------------------
// Pieces shared by the stages (and handy in tests).

struct SnapshotSet
{
  std::vector<int> ids;  // successful samples, ascending
  std::vector<Trajectory> trajectories;
  Matrix design;  // full design, one row per requested sample
  Vector times;
  Index train_count = 0;
  double fom_seconds_mean = 0.0;

  std::vector<Index> train_indices() const;
  std::vector<Index> test_indices() const;
};

SnapshotSet load_snapshots(const StudyConfig &config);

struct RomBundle
{
  std::string variant;
  ReducedBasis basis;
  GlobalRom global;
  TdRom td;

  Matrix predict_trajectory(const Vector &times, const Vector &mu, Matrix *variance = nullptr) const;
};

RomBundle load_rom_bundle(const StudyConfig &config, const std::string &variant);

// Scalar QoIs: one per (probe, step), names like "p0_z_t10".
struct QoiSet
{
  std::vector<Probe> probes;  // step set expanded
  std::vector<std::string> names;
  std::vector<int> vertices;       // resolved (snapped) vertex per probe
  std::vector<double> probe_times; // step * dt
};

QoiSet resolve_qois(const StudyConfig &config, const Mesh &mesh);

// Opaque input-output maps consumed by the SA and MCMC drivers. The drivers
// only ever see std::function, never solver internals.
std::function<Vector(const Vector &)> make_fom_qoi_model(const StudyConfig &config);
std::function<Vector(const Vector &)> make_rom_qoi_model(const StudyConfig &config,
                                                         const RomBundle &bundle);

// Rows of `points` are evaluated concurrently; row i of the result is the
// QoI vector at point i.
Matrix evaluate_model(const std::function<Vector(const Vector &)> &model, const Matrix &points,
                      Index num_qois, unsigned workers);

}  // namespace romuq

#endif  // ROMUQ_STUDY_HPP
