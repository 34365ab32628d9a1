#include "romuq/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "romuq/error.hpp"
#include "romuq/parallel.hpp"
#include "romuq/rng.hpp"

namespace romuq
{

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sample_filename(int id)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%04d.bin", id);
  return buf;
}

json gp_config_to_json(const GpConfig &gp)
{
  return json{{"kernel", to_string(gp.kernel)},
              {"polynomial_degree", gp.polynomial_degree},
              {"noise", gp.noise == NoiseMode::Learned ? "learned" : "fixed"},
              {"fixed_noise_std", gp.fixed_noise_std},
              {"starts", gp.num_starts},
              {"max_iterations", gp.max_iterations},
              {"gradient_tol", gp.gradient_tol},
              {"input_scaling", to_string(gp.input_scaling)},
              {"output_scaling", to_string(gp.output_scaling)}};
}

json fom_config_to_json(const FomConfig &fom)
{
  return json{{"dt", fom.dt},
              {"t_final", fom.t_final},
              {"newton_tol", fom.newton_tol},
              {"newton_max_iter", fom.newton_max_iter},
              {"quadrature_order", fom.quadrature_order},
              {"density", fom.density}};
}

json probes_to_json(const std::vector<QoiProbeConfig> &probes)
{
  json arr = json::array();
  for (const auto &probe : probes) {
    json p;
    if (probe.base.vertex >= 0) {
      p["vertex"] = probe.base.vertex;
    } else {
      p["point"] = {probe.base.point[0], probe.base.point[1], probe.base.point[2]};
    }
    p["component"] = probe.base.component;
    p["steps"] = probe.steps;
    arr.push_back(p);
  }
  return arr;
}

// Stage fingerprints hash the effective (parsed) configuration, not the raw
// document, so omitted-but-defaulted fields do not invalidate artifacts.
std::string snapshots_hash(const StudyConfig &c)
{
  return json_hash(json{{"stage", "snapshots"},
                        {"seed", c.seed},
                        {"space", parameter_space_to_json(c.space)},
                        {"mesh", c.mesh_doc},
                        {"fom", fom_config_to_json(c.fom)},
                        {"num_samples", c.num_samples},
                        {"train_fraction", c.train_fraction}});
}

std::string pod_hash(const StudyConfig &c)
{
  return json_hash(json{{"stage", "pod"},
                        {"upstream", snapshots_hash(c)},
                        {"criterion", c.pod_criterion.kind == PodCriterion::Kind::EnergyTolerance
                                          ? json{{"energy", c.pod_criterion.tolerance}}
                                          : json{{"fixed", c.pod_criterion.dimension}}},
                        {"table", c.pod_table_tolerances}});
}

std::string train_hash(const StudyConfig &c, const std::string &variant)
{
  json doc{{"stage", "train"},
           {"upstream", pod_hash(c)},
           {"variant", variant},
           {"svd_tolerance", c.svd_tolerance},
           {"time_stride", c.time_stride},
           {"gp", gp_config_to_json(c.gp)}};
  if (variant == "td" && c.td_gp) doc["td_gp"] = gp_config_to_json(*c.td_gp);
  return json_hash(doc);
}

std::string model_hash(const StudyConfig &c, const std::string &model)
{
  if (model == "fom")
    return json_hash(json{{"model", "fom"},
                          {"mesh", c.mesh_doc},
                          {"fom", fom_config_to_json(c.fom)}});
  if (model.rfind("rom:", 0) == 0) return train_hash(c, model.substr(4));
  throw Error("unknown model '" + model + "' (expected fom, rom:global or rom:td)");
}

bool stage_up_to_date(const std::filesystem::path &dir, const std::string &hash, json *manifest_out)
{
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) return false;
  json manifest;
  try {
    manifest = load_json(manifest_path);
  } catch (const IoError &) {
    return false;
  }
  if (manifest.value("config_hash", "") != hash) return false;
  for (const auto &file : manifest.value("files", std::vector<std::string>{}))
    if (!std::filesystem::exists(dir / file)) return false;
  if (manifest_out) *manifest_out = manifest;
  return true;
}

StageResult finish_stage(const std::filesystem::path &dir, json manifest,
                         std::vector<std::string> files, const json &timings)
{
  std::sort(files.begin(), files.end());
  manifest["files"] = files;
  save_json(dir / "manifest.json", manifest);
  save_json(dir / "timings.json", timings);
  return {dir, false, manifest};
}

int component_from_json(const json &value)
{
  if (value.is_number_integer()) {
    const int c = value.get<int>();
    if (c < 0 || c > 2) throw Error("qoi component must be 0..2 or x/y/z");
    return c;
  }
  const std::string s = value.get<std::string>();
  if (s == "x") return 0;
  if (s == "y") return 1;
  if (s == "z") return 2;
  throw Error("qoi component must be 0..2 or x/y/z");
}

const char *component_name(int c) { return c == 0 ? "x" : (c == 1 ? "y" : "z"); }

void write_table(const std::filesystem::path &path, const std::vector<std::string> &header,
                 const std::vector<std::vector<std::string>> &rows)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto &row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration.

StudyConfig StudyConfig::from_json(const json &doc)
{
  StudyConfig c;
  c.raw = doc;
  c.seed = doc.value("seed", 0ULL);
  c.workers = doc.value("workers", 0U);
  if (doc.contains("output")) c.output_dir = doc.at("output").get<std::string>();

  c.space = parameter_space_from_json(doc.at("parameter_space"));
  c.mesh_doc = doc.at("mesh");
  c.fom = fom_config_from_json(doc.value("fom", json::object()));

  if (doc.contains("sampling")) {
    const json &s = doc.at("sampling");
    c.num_samples = s.value("num_samples", c.num_samples);
    c.train_fraction = s.value("train_fraction", c.train_fraction);
  }
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
    throw Error("StudyConfig: train_fraction must lie in (0, 1)");

  if (doc.contains("pod")) {
    const json &p = doc.at("pod");
    const std::string kind = p.value("criterion", "energy");
    if (kind == "energy") {
      c.pod_criterion = PodCriterion::energy(p.value("tolerance", 5e-4));
    } else if (kind == "fixed") {
      c.pod_criterion = PodCriterion::fixed(p.value("dimension", Index{5}));
    } else {
      throw Error("StudyConfig: pod criterion must be 'energy' or 'fixed'");
    }
    if (p.contains("table_tolerances"))
      c.pod_table_tolerances = p.at("table_tolerances").get<std::vector<double>>();
  }

  if (doc.contains("rom")) {
    const json &r = doc.at("rom");
    c.rom_variant = r.value("variant", c.rom_variant);
    c.svd_tolerance = r.value("svd_tolerance", c.svd_tolerance);
    c.time_stride = r.value("time_stride", c.time_stride);
    auto parse_gp = [](const json &g, GpConfig base) {
      base.kernel = kernel_kind_from_string(g.value("kernel", to_string(base.kernel)));
      base.polynomial_degree = g.value("polynomial_degree", base.polynomial_degree);
      const std::string noise =
          g.value("noise", base.noise == NoiseMode::Fixed ? "fixed" : "learned");
      base.noise = noise == "fixed" ? NoiseMode::Fixed : NoiseMode::Learned;
      base.fixed_noise_std = g.value("fixed_noise_std", base.fixed_noise_std);
      base.num_starts = g.value("starts", base.num_starts);
      base.max_iterations = g.value("max_iterations", base.max_iterations);
      base.gradient_tol = g.value("gradient_tol", base.gradient_tol);
      const std::string scaling = g.value("scaling", to_string(base.input_scaling));
      base.input_scaling = scaler_kind_from_string(scaling);
      base.output_scaling = base.input_scaling;
      return base;
    };
    if (r.contains("gp")) c.gp = parse_gp(r.at("gp"), c.gp);
    if (r.contains("td_gp")) c.td_gp = parse_gp(r.at("td_gp"), c.gp);
  }

  if (doc.contains("qoi")) {
    for (const auto &q : doc.at("qoi")) {
      QoiProbeConfig probe;
      if (q.contains("vertex")) {
        probe.base.vertex = q.at("vertex").get<int>();
      } else {
        const auto pt = q.at("point").get<std::vector<double>>();
        if (pt.size() != 3) throw Error("qoi point must have three coordinates");
        probe.base.point = Vector3(pt[0], pt[1], pt[2]);
      }
      probe.base.component = component_from_json(q.at("component"));
      probe.steps = q.at("steps").get<std::vector<int>>();
      if (probe.steps.empty()) throw Error("qoi needs at least one step");
      c.probes.push_back(std::move(probe));
    }
  }

  if (doc.contains("morris")) {
    c.morris_trajectories = doc.at("morris").value("trajectories", c.morris_trajectories);
    c.morris_levels = doc.at("morris").value("levels", c.morris_levels);
  }
  if (doc.contains("sobol")) {
    c.sobol_samples = doc.at("sobol").value("num_samples", c.sobol_samples);
    c.sobol_per_step = doc.at("sobol").value("per_step", c.sobol_per_step);
  }
  if (doc.contains("mcmc")) {
    const json &m = doc.at("mcmc");
    c.mcmc.num_iterations = m.value("iterations", c.mcmc.num_iterations);
    c.mcmc.burn_in = m.value("burn_in", c.mcmc.burn_in);
    c.mcmc.thinning = m.value("thinning", c.mcmc.thinning);
    const std::string prop = m.value("proposal", "uniform");
    if (prop == "uniform") {
      c.mcmc.proposal = ProposalKind::IndependenceUniform;
    } else if (prop == "gaussian") {
      c.mcmc.proposal = ProposalKind::GaussianRandomWalk;
    } else {
      throw Error("StudyConfig: mcmc proposal must be 'uniform' or 'gaussian'");
    }
    if (m.contains("walk_step")) {
      const auto step = m.at("walk_step").get<std::vector<double>>();
      c.mcmc.walk_step = Eigen::Map<const Vector>(step.data(), static_cast<Index>(step.size()));
    }
    c.mcmc_noise_variance = m.value("noise_variance", c.mcmc_noise_variance);
    if (m.contains("target")) {
      const auto t = m.at("target").get<std::vector<double>>();
      c.mcmc_target = Eigen::Map<const Vector>(t.data(), static_cast<Index>(t.size()));
    }
    if (m.contains("initial")) {
      const auto t = m.at("initial").get<std::vector<double>>();
      c.mcmc.initial = Eigen::Map<const Vector>(t.data(), static_cast<Index>(t.size()));
    }
    if (m.contains("prior")) c.mcmc_prior = parameter_space_from_json(m.at("prior"));
  }
  return c;
}

StudyConfig StudyConfig::from_file(const std::filesystem::path &path)
{
  return from_json(load_json(path));
}

Mesh StudyConfig::make_mesh() const
{
  Mesh mesh = mesh_from_json(mesh_doc);
  mesh.validate(fom.quadrature_order);
  return mesh;
}

// ---------------------------------------------------------------------------
// Snapshots.

StageResult cmd_snapshots(const StudyConfig &config)
{
  const auto dir = config.output_dir / "snapshots";
  const std::string hash = snapshots_hash(config);
  json existing;
  if (stage_up_to_date(dir, hash, &existing)) return {dir, true, existing};
  std::filesystem::create_directories(dir);

  const auto start = Clock::now();
  const Mesh mesh = config.make_mesh();
  const std::string mesh_hash = hash_hex(mesh.content_hash());

  Rng design_rng = Rng(config.seed).substream("fom-sampling");
  const Matrix design = lhs_sample(config.space, config.num_samples, design_rng);
  write_csv(dir / "design.csv", config.space.names, design);
  save_json(dir / "design.csv.json", json{{"seed", config.seed}, {"config_hash", hash}});

  struct Outcome
  {
    bool ok = false;
    std::string error;
    double seconds = 0.0;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(config.num_samples));

  parallel_for(static_cast<std::size_t>(config.num_samples), config.workers, [&](std::size_t i) {
    auto &out = outcomes[i];
    const auto t0 = Clock::now();
    try {
      const Trajectory traj = solve_fom(design.row(static_cast<Index>(i)).transpose(), mesh, config.fom);
      out.seconds = seconds_since(t0);
      save_trajectory(dir / sample_filename(static_cast<int>(i)), traj,
                      json{{"seed", config.seed},
                           {"config_hash", hash},
                           {"mesh_hash", mesh_hash},
                           {"sample_id", i}});
      out.ok = true;
    } catch (const std::exception &err) {
      out.seconds = seconds_since(t0);
      out.error = err.what();
    }
  });

  json samples = json::array();
  std::vector<std::string> files = {"design.csv", "design.csv.json"};
  int failures = 0;
  std::vector<double> fom_seconds;
  for (Index i = 0; i < config.num_samples; ++i) {
    const auto &out = outcomes[static_cast<std::size_t>(i)];
    json entry{{"id", i}, {"status", out.ok ? "ok" : "failed"}};
    if (out.ok) {
      entry["file"] = sample_filename(static_cast<int>(i));
      files.push_back(sample_filename(static_cast<int>(i)));
      files.push_back(sample_filename(static_cast<int>(i)) + ".json");
      fom_seconds.push_back(out.seconds);
    } else {
      entry["error"] = out.error;
      ++failures;
    }
    samples.push_back(entry);
  }
  if (failures > 0)
    std::cerr << "cmd_snapshots: warning: " << failures << " of " << config.num_samples
              << " samples failed; continuing with the survivors\n";
  if (failures == config.num_samples) throw Error("cmd_snapshots: every sample failed");

  const Index n_ok = config.num_samples - failures;
  Index train_count = static_cast<Index>(std::llround(config.train_fraction * static_cast<double>(n_ok)));
  train_count = std::clamp<Index>(train_count, 1, std::max<Index>(n_ok - 1, 1));

  json manifest{{"stage", "snapshots"},
                {"seed", config.seed},
                {"config_hash", hash},
                {"mesh_hash", mesh_hash},
                {"num_samples", config.num_samples},
                {"num_failures", failures},
                {"train_count", train_count},
                {"num_steps", config.fom.num_steps()},
                {"dt", config.fom.dt},
                {"samples", samples}};

  double mean_seconds = 0.0;
  for (double s : fom_seconds) mean_seconds += s;
  if (!fom_seconds.empty()) mean_seconds /= static_cast<double>(fom_seconds.size());
  const json timings{{"fom_seconds", fom_seconds},
                     {"fom_seconds_mean", mean_seconds},
                     {"total_seconds", seconds_since(start)}};
  return finish_stage(dir, std::move(manifest), std::move(files), timings);
}

SnapshotSet load_snapshots(const StudyConfig &config)
{
  const auto dir = config.output_dir / "snapshots";
  const json manifest = load_json(dir / "manifest.json");

  SnapshotSet set;
  set.design = read_csv(dir / "design.csv").rows;
  set.train_count = manifest.at("train_count").get<Index>();
  for (const auto &entry : manifest.at("samples")) {
    if (entry.at("status").get<std::string>() != "ok") continue;
    set.ids.push_back(entry.at("id").get<int>());
    set.trajectories.push_back(load_trajectory(dir / entry.at("file").get<std::string>()));
  }
  if (set.trajectories.empty()) throw Error("load_snapshots: no successful samples");
  set.times = set.trajectories.front().times;

  const auto timings_path = dir / "timings.json";
  if (std::filesystem::exists(timings_path))
    set.fom_seconds_mean = load_json(timings_path).value("fom_seconds_mean", 0.0);
  return set;
}

std::vector<Index> SnapshotSet::train_indices() const
{
  std::vector<Index> idx;
  for (Index i = 0; i < train_count && i < static_cast<Index>(ids.size()); ++i) idx.push_back(i);
  return idx;
}

std::vector<Index> SnapshotSet::test_indices() const
{
  std::vector<Index> idx;
  for (Index i = train_count; i < static_cast<Index>(ids.size()); ++i) idx.push_back(i);
  return idx;
}

// ---------------------------------------------------------------------------
// POD.

StageResult cmd_pod(const StudyConfig &config)
{
  const auto dir = config.output_dir / "pod";
  const std::string hash = pod_hash(config);
  json existing;
  if (stage_up_to_date(dir, hash, &existing)) return {dir, true, existing};

  const auto start = Clock::now();
  const SnapshotSet set = load_snapshots(config);
  std::filesystem::create_directories(dir);

  const auto train = set.train_indices();
  const Index nh = set.trajectories.front().num_dofs();
  const Index nt = set.times.size();
  Matrix snapshots(nh, nt * static_cast<Index>(train.size()));
  for (std::size_t k = 0; k < train.size(); ++k)
    snapshots.middleCols(static_cast<Index>(k) * nt, nt) =
        set.trajectories[static_cast<std::size_t>(train[k])].dofs_per_step;

  const ReducedBasis basis = build_basis(snapshots, config.pod_criterion);

  save_basis(dir / "basis.bin", basis, json{{"seed", config.seed}, {"config_hash", hash}});

  const auto dims = basis_dimension_table(basis.singular_values, config.pod_table_tolerances);
  Matrix table(static_cast<Index>(dims.size()), 2);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    table(static_cast<Index>(i), 0) = config.pod_table_tolerances[i];
    table(static_cast<Index>(i), 1) = static_cast<double>(dims[i]);
  }
  write_csv(dir / "pod_table.csv", {"tolerance", "dimension"}, table);

  json manifest{{"stage", "pod"},
                {"seed", config.seed},
                {"config_hash", hash},
                {"upstream", snapshots_hash(config)},
                {"dimension", basis.dimension()},
                {"train_samples", train.size()}};
  const json timings{{"total_seconds", seconds_since(start)}};
  return finish_stage(dir, std::move(manifest),
                      {"basis.bin", "basis.bin.json", "pod_table.csv"}, timings);
}

// ---------------------------------------------------------------------------
// ROM training.

namespace
{

Matrix training_params(const SnapshotSet &set)
{
  const auto train = set.train_indices();
  Matrix params(static_cast<Index>(train.size()), set.design.cols());
  for (std::size_t k = 0; k < train.size(); ++k)
    params.row(static_cast<Index>(k)) = set.design.row(set.ids[static_cast<std::size_t>(train[k])]);
  return params;
}

}  // namespace

StageResult cmd_train(const StudyConfig &config, const std::string &variant)
{
  if (variant != "global" && variant != "td")
    throw Error("cmd_train: variant must be 'global' or 'td'");
  const auto dir = config.output_dir / ("rom_" + variant);
  const std::string hash = train_hash(config, variant);
  json existing;
  if (stage_up_to_date(dir, hash, &existing)) return {dir, true, existing};

  cmd_pod(config);  // ensure the basis exists and is current
  const auto start = Clock::now();
  const SnapshotSet set = load_snapshots(config);
  const ReducedBasis basis = load_basis(config.output_dir / "pod" / "basis.bin");
  std::filesystem::create_directories(dir);

  const auto train = set.train_indices();
  const Index nt = set.times.size();
  Matrix snapshots(basis.num_dofs(), nt * static_cast<Index>(train.size()));
  for (std::size_t k = 0; k < train.size(); ++k)
    snapshots.middleCols(static_cast<Index>(k) * nt, nt) =
        set.trajectories[static_cast<std::size_t>(train[k])].dofs_per_step;

  const CoefficientTable table =
      project_table(basis, snapshots, nt, static_cast<Index>(train.size()));
  const Vector times = set.times;
  const Matrix params = training_params(set);

  std::vector<std::string> files = {"basis.bin", "basis.bin.json"};
  const json provenance{{"seed", config.seed}, {"config_hash", hash}};
  save_basis(dir / "basis.bin", basis, provenance);

  json manifest{{"stage", "train"},
                {"variant", variant},
                {"seed", config.seed},
                {"config_hash", hash},
                {"upstream", pod_hash(config)},
                {"time_stride", config.time_stride},
                {"gp", gp_config_to_json(config.gp)},
                {"dimension", basis.dimension()}};

  double train_seconds = 0.0;
  if (variant == "global") {
    const auto t0 = Clock::now();
    const GlobalRom rom = train_global_rom(basis, table, times, params, config.gp, config.seed,
                                           config.workers, config.time_stride);
    train_seconds = seconds_since(t0);
    for (Index ell = 0; ell < rom.dimension(); ++ell) {
      char name[32];
      std::snprintf(name, sizeof(name), "gp_%03d", static_cast<int>(ell));
      save_gp(dir / name, rom.gps[static_cast<std::size_t>(ell)], provenance);
      files.push_back(std::string(name) + ".json");
      files.push_back(std::string(name) + ".bin");
    }
    manifest["gp_count"] = rom.dimension();
    manifest["train_times"] = std::vector<double>(times.data(), times.data() + times.size());
  } else {
    const auto t0 = Clock::now();
    const TdRom rom = train_td_rom(basis, table, times, params, config.svd_tolerance,
                                   config.td_gp.value_or(config.gp), config.seed, config.workers);
    train_seconds = seconds_since(t0);
    json modes = json::array();
    for (Index ell = 0; ell < rom.dimension(); ++ell) {
      const auto &model = rom.coefficients[static_cast<std::size_t>(ell)];
      json entry{{"rank", model.rank()},
                 {"lambdas", std::vector<double>(model.lambdas.data(),
                                                 model.lambdas.data() + model.lambdas.size())},
                 {"singular_values",
                  std::vector<double>(model.all_singular_values.data(),
                                      model.all_singular_values.data() +
                                          model.all_singular_values.size())}};
      for (Index k = 0; k < model.rank(); ++k) {
        char tname[48], pname[48];
        std::snprintf(tname, sizeof(tname), "ell_%03d_time_%02d", static_cast<int>(ell),
                      static_cast<int>(k));
        std::snprintf(pname, sizeof(pname), "ell_%03d_param_%02d", static_cast<int>(ell),
                      static_cast<int>(k));
        save_gp(dir / tname, model.time_gps[static_cast<std::size_t>(k)], provenance);
        save_gp(dir / pname, model.param_gps[static_cast<std::size_t>(k)], provenance);
        for (const char *n : {tname, pname}) {
          files.push_back(std::string(n) + ".json");
          files.push_back(std::string(n) + ".bin");
        }
      }
      modes.push_back(entry);
    }
    manifest["svd_tolerance"] = config.svd_tolerance;
    manifest["modes"] = modes;
    manifest["gp_count"] = rom.gp_count();
    manifest["train_times"] = std::vector<double>(times.data(), times.data() + times.size());
  }

  // Training design, for provenance and for reloading the bundle.
  write_csv(dir / "train_params.csv", config.space.names, params);
  files.push_back("train_params.csv");

  const json timings{{"train_seconds", train_seconds}, {"total_seconds", seconds_since(start)}};
  return finish_stage(dir, std::move(manifest), std::move(files), timings);
}

RomBundle load_rom_bundle(const StudyConfig &config, const std::string &variant)
{
  const auto dir = config.output_dir / ("rom_" + variant);
  const json manifest = load_json(dir / "manifest.json");

  RomBundle bundle;
  bundle.variant = variant;
  bundle.basis = load_basis(dir / "basis.bin");
  const auto times_std = manifest.at("train_times").get<std::vector<double>>();
  const Vector times = Eigen::Map<const Vector>(times_std.data(), static_cast<Index>(times_std.size()));
  const Matrix params = read_csv(dir / "train_params.csv").rows;

  if (variant == "global") {
    bundle.global.basis = bundle.basis;
    bundle.global.train_times = times;
    bundle.global.train_params = params;
    const Index count = manifest.at("gp_count").get<Index>();
    for (Index ell = 0; ell < count; ++ell) {
      char name[32];
      std::snprintf(name, sizeof(name), "gp_%03d", static_cast<int>(ell));
      bundle.global.gps.push_back(load_gp(dir / name));
    }
  } else {
    bundle.td.basis = bundle.basis;
    bundle.td.train_times = times;
    bundle.td.train_params = params;
    bundle.td.svd_tolerance = manifest.value("svd_tolerance", 0.0);
    const json &modes = manifest.at("modes");
    for (Index ell = 0; ell < static_cast<Index>(modes.size()); ++ell) {
      const json &entry = modes[static_cast<std::size_t>(ell)];
      TdRom::CoefficientModel model;
      const auto lambdas = entry.at("lambdas").get<std::vector<double>>();
      model.lambdas = Eigen::Map<const Vector>(lambdas.data(), static_cast<Index>(lambdas.size()));
      const auto sigma = entry.at("singular_values").get<std::vector<double>>();
      model.all_singular_values =
          Eigen::Map<const Vector>(sigma.data(), static_cast<Index>(sigma.size()));
      for (Index k = 0; k < model.rank(); ++k) {
        char tname[48], pname[48];
        std::snprintf(tname, sizeof(tname), "ell_%03d_time_%02d", static_cast<int>(ell),
                      static_cast<int>(k));
        std::snprintf(pname, sizeof(pname), "ell_%03d_param_%02d", static_cast<int>(ell),
                      static_cast<int>(k));
        model.time_gps.push_back(load_gp(dir / tname));
        model.param_gps.push_back(load_gp(dir / pname));
      }
      bundle.td.coefficients.push_back(std::move(model));
    }
  }
  return bundle;
}

Matrix RomBundle::predict_trajectory(const Vector &times, const Vector &mu, Matrix *variance) const
{
  if (variant == "global") return predict_global_trajectory(global, times, mu, variance);
  return predict_td_trajectory(td, times, mu, variance);
}

// ---------------------------------------------------------------------------
// QoIs and model callables.

QoiSet resolve_qois(const StudyConfig &config, const Mesh &mesh)
{
  if (config.probes.empty()) throw Error("no QoI probes configured");
  QoiSet set;
  for (std::size_t p = 0; p < config.probes.size(); ++p) {
    const auto &probe = config.probes[p];
    const int vertex = resolve_probe_vertex(mesh, probe.base);
    for (int step : probe.steps) {
      if (step < 1 || step > config.fom.num_steps())
        throw Error("qoi step " + std::to_string(step) + " outside the time grid");
      Probe q = probe.base;
      q.vertex = vertex;
      q.step = step;
      set.probes.push_back(q);
      set.vertices.push_back(vertex);
      set.probe_times.push_back(step * config.fom.dt);
      set.names.push_back("p" + std::to_string(p) + "_" + component_name(q.component) + "_t" +
                          std::to_string(step));
    }
  }
  return set;
}

std::function<Vector(const Vector &)> make_fom_qoi_model(const StudyConfig &config)
{
  auto mesh = std::make_shared<Mesh>(config.make_mesh());
  auto qois = std::make_shared<QoiSet>(resolve_qois(config, *mesh));
  const FomConfig fom = config.fom;
  return [mesh, qois, fom](const Vector &mu) {
    const Trajectory traj = solve_fom(mu, *mesh, fom);
    Vector y(static_cast<Index>(qois->probes.size()));
    for (std::size_t k = 0; k < qois->probes.size(); ++k)
      y[static_cast<Index>(k)] = extract_qoi(traj, *mesh, qois->probes[k]).value;
    return y;
  };
}

std::function<Vector(const Vector &)> make_rom_qoi_model(const StudyConfig &config,
                                                         const RomBundle &bundle)
{
  const Mesh mesh = config.make_mesh();
  const QoiSet qois = resolve_qois(config, mesh);

  // Unique probe times, queried once per evaluation.
  std::vector<double> unique_times = qois.probe_times;
  std::sort(unique_times.begin(), unique_times.end());
  unique_times.erase(std::unique(unique_times.begin(), unique_times.end()), unique_times.end());
  Vector times(static_cast<Index>(unique_times.size()));
  for (std::size_t i = 0; i < unique_times.size(); ++i) times[static_cast<Index>(i)] = unique_times[i];

  // Probe rows of V: the only N_h-sized data, extracted once offline.
  Matrix probe_rows(static_cast<Index>(qois.probes.size()), bundle.basis.dimension());
  std::vector<Index> time_index(qois.probes.size());
  for (std::size_t k = 0; k < qois.probes.size(); ++k) {
    const auto &probe = qois.probes[k];
    probe_rows.row(static_cast<Index>(k)) =
        bundle.basis.modes.row(3 * probe.vertex + probe.component);
    time_index[k] = static_cast<Index>(
        std::lower_bound(unique_times.begin(), unique_times.end(), qois.probe_times[k]) -
        unique_times.begin());
  }

  auto shared = std::make_shared<RomBundle>(bundle);
  return [shared, probe_rows, time_index, times](const Vector &mu) {
    const Matrix q = shared->predict_trajectory(times, mu);
    Vector y(probe_rows.rows());
    for (Index k = 0; k < probe_rows.rows(); ++k)
      y[k] = probe_rows.row(k).dot(q.col(time_index[static_cast<std::size_t>(k)]));
    return y;
  };
}

Matrix evaluate_model(const std::function<Vector(const Vector &)> &model, const Matrix &points,
                      Index num_qois, unsigned workers)
{
  Matrix outputs(points.rows(), num_qois);
  parallel_for(static_cast<std::size_t>(points.rows()), workers, [&](std::size_t i) {
    const Vector y = model(points.row(static_cast<Index>(i)).transpose());
    if (y.size() != num_qois) throw DimensionError("model returned the wrong number of QoIs");
    outputs.row(static_cast<Index>(i)) = y.transpose();
  });
  return outputs;
}

// ---------------------------------------------------------------------------
// Evaluation.

StageResult cmd_evaluate(const StudyConfig &config, const std::string &variant)
{
  const auto dir = config.output_dir / ("evaluate_" + variant);
  const std::string hash =
      json_hash(json{{"stage", "evaluate"}, {"upstream", train_hash(config, variant)}});
  json existing;
  if (stage_up_to_date(dir, hash, &existing)) return {dir, true, existing};

  cmd_train(config, variant);
  const auto start = Clock::now();
  const SnapshotSet set = load_snapshots(config);
  const RomBundle bundle = load_rom_bundle(config, variant);
  std::filesystem::create_directories(dir);

  const auto test = set.test_indices();
  if (test.empty()) throw Error("cmd_evaluate: test split is empty");

  std::vector<Trajectory> truth;
  std::vector<Matrix> predictions;
  std::vector<Matrix> projections;
  for (Index idx : test) {
    const auto &traj = set.trajectories[static_cast<std::size_t>(idx)];
    truth.push_back(traj);
    const Vector mu = set.design.row(set.ids[static_cast<std::size_t>(idx)]).transpose();
    predictions.push_back(bundle.predict_trajectory(set.times, mu));
    projections.push_back(project(bundle.basis, traj.dofs_per_step));
  }

  const ErrorReport rom_report = error_metrics(truth, predictions, bundle.basis);
  const ErrorReport proj_report = error_metrics(truth, projections, bundle.basis);

  // Online cost: median of 3 full-trajectory coefficient predictions
  // (reconstruction excluded).
  const Vector mu0 = set.design.row(set.ids[static_cast<std::size_t>(test[0])]).transpose();
  std::vector<double> online(3);
  for (auto &t : online) {
    const auto t0 = Clock::now();
    volatile double sink = bundle.predict_trajectory(set.times, mu0).sum();
    (void)sink;
    t = seconds_since(t0);
  }
  std::sort(online.begin(), online.end());
  const double online_seconds = online[1];
  const double speedup = online_seconds > 0.0 ? set.fom_seconds_mean / online_seconds : 0.0;

  Matrix metrics(bundle.basis.dimension(), 4);
  for (Index ell = 0; ell < bundle.basis.dimension(); ++ell)
    metrics.row(ell) << static_cast<double>(ell), rom_report.mse[ell], rom_report.rse[ell],
        static_cast<double>(rom_report.rse_degenerate[static_cast<std::size_t>(ell)]);
  write_csv(dir / "metrics.csv", {"coefficient", "mse", "rse", "rse_degenerate"}, metrics);

  Matrix samples(static_cast<Index>(test.size()), 5);
  for (std::size_t k = 0; k < test.size(); ++k)
    samples.row(static_cast<Index>(k)) << static_cast<double>(set.ids[static_cast<std::size_t>(test[k])]),
        rom_report.tae[static_cast<Index>(k)], rom_report.tre[static_cast<Index>(k)],
        static_cast<double>(rom_report.tre_degenerate[k]), proj_report.tae[static_cast<Index>(k)];
  write_csv(dir / "samples.csv", {"sample_id", "tae", "tre", "tre_degenerate", "projection_tae"},
            samples);

  // Mean error over the test set per time step (the data behind the
  // error-versus-time figures).
  const Index nt = set.times.size();
  Matrix per_step(nt, 4);
  for (Index n = 0; n < nt; ++n) {
    double abs_acc = 0.0, rel_acc = 0.0;
    Index rel_count = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const Vector diff =
          truth[k].dofs_per_step.col(n) - reconstruct(bundle.basis, predictions[k].col(n));
      const double mag = truth[k].dofs_per_step.col(n).norm();
      abs_acc += diff.norm();
      if (mag > 0.0) {
        rel_acc += diff.norm() / mag;
        ++rel_count;
      }
    }
    per_step.row(n) << static_cast<double>(n + 1), set.times[n],
        abs_acc / static_cast<double>(truth.size()),
        rel_count > 0 ? rel_acc / static_cast<double>(rel_count)
                      : std::numeric_limits<double>::quiet_NaN();
  }
  write_csv(dir / "per_step.csv", {"step", "time", "mean_abs_error", "mean_rel_error"}, per_step);

  json summary{{"variant", variant},
               {"seed", config.seed},
               {"config_hash", hash},
               {"mean_tae", rom_report.mean_tae},
               {"mean_tre", rom_report.mean_tre},
               {"projection_mean_tae", proj_report.mean_tae},
               {"projection_mean_tre", proj_report.mean_tre},
               {"test_samples", test.size()}};
  save_json(dir / "summary.json", summary);

  json manifest{{"stage", "evaluate"},
                {"variant", variant},
                {"seed", config.seed},
                {"config_hash", hash},
                {"upstream", train_hash(config, variant)}};
  const json timings{{"online_seconds_median", online_seconds},
                     {"fom_seconds_mean", set.fom_seconds_mean},
                     {"speedup", speedup},
                     {"total_seconds", seconds_since(start)}};
  return finish_stage(dir, std::move(manifest),
                      {"metrics.csv", "samples.csv", "per_step.csv", "summary.json"}, timings);
}

// ---------------------------------------------------------------------------
// Sensitivity analysis and calibration drivers.

namespace
{

std::function<Vector(const Vector &)> make_model(const StudyConfig &config, const std::string &model)
{
  if (model == "fom") return make_fom_qoi_model(config);
  if (model.rfind("rom:", 0) == 0) {
    const std::string variant = model.substr(4);
    cmd_train(config, variant);
    return make_rom_qoi_model(config, load_rom_bundle(config, variant));
  }
  throw Error("unknown model '" + model + "' (expected fom, rom:global or rom:td)");
}

std::string model_dir_suffix(const std::string &model)
{
  std::string s = model;
  std::replace(s.begin(), s.end(), ':', '_');
  return s;
}

}  // namespace

StageResult cmd_morris(const StudyConfig &config, const std::string &model)
{
  const auto dir = config.output_dir / ("morris_" + model_dir_suffix(model));
  const std::string hash = json_hash(json{{"stage", "morris"},
                                          {"seed", config.seed},
                                          {"space", parameter_space_to_json(config.space)},
                                          {"trajectories", config.morris_trajectories},
                                          {"levels", config.morris_levels},
                                          {"qoi", probes_to_json(config.probes)},
                                          {"model", model_hash(config, model)}});
  json existing;
  if (stage_up_to_date(dir, hash, &existing)) return {dir, true, existing};

  const auto start = Clock::now();
  const Mesh mesh = config.make_mesh();
  const QoiSet qois = resolve_qois(config, mesh);
  const auto fn = make_model(config, model);
  std::filesystem::create_directories(dir);

  const MorrisDesign design =
      morris_design(config.space, config.morris_trajectories, config.morris_levels, config.seed);
  const Matrix outputs =
      evaluate_model(fn, design.physical_points, static_cast<Index>(qois.names.size()), config.workers);
  const MorrisResult result = morris_indices(design, outputs);

  write_csv(dir / "design.csv", config.space.names, design.physical_points);
  save_json(dir / "design.csv.json", json{{"seed", config.seed}, {"config_hash", hash}});
  write_csv(dir / "outputs.csv", qois.names, outputs);

  std::vector<std::vector<std::string>> rows, scaled_rows;
  const Matrix scaled_abs = min_max_scale_columns(result.mean_abs);
  const Matrix scaled_spread = min_max_scale_columns(result.spread);
  for (Index q = 0; q < result.mean.cols(); ++q)
    for (Index i = 0; i < result.mean.rows(); ++i) {
      rows.push_back({config.space.names[static_cast<std::size_t>(i)], qois.names[static_cast<std::size_t>(q)],
                      format_double(result.mean(i, q)), format_double(result.mean_abs(i, q)),
                      format_double(result.spread(i, q))});
      scaled_rows.push_back({config.space.names[static_cast<std::size_t>(i)],
                             qois.names[static_cast<std::size_t>(q)],
                             format_double(scaled_abs(i, q)), format_double(scaled_spread(i, q))});
    }
  write_table(dir / "morris.csv", {"input", "qoi", "mean", "mean_abs", "spread"}, rows);
  write_table(dir / "morris_scaled.csv", {"input", "qoi", "mean_abs_scaled", "spread_scaled"},
              scaled_rows);

  json manifest{{"stage", "morris"},
                {"model", model},
                {"seed", config.seed},
                {"config_hash", hash},
                {"trajectories", config.morris_trajectories},
                {"levels", config.morris_levels},
                {"delta", design.delta},
                {"evaluations", design.num_points()},
                {"qois", qois.names}};
  const json timings{{"total_seconds", seconds_since(start)}};
  return finish_stage(
      dir, std::move(manifest),
      {"design.csv", "design.csv.json", "outputs.csv", "morris.csv", "morris_scaled.csv"}, timings);
}

StageResult cmd_sobol(const StudyConfig &config, const std::string &model)
{
  const auto dir = config.output_dir / ("sobol_" + model_dir_suffix(model));
  const std::string hash = json_hash(json{{"stage", "sobol"},
                                          {"seed", config.seed},
                                          {"space", parameter_space_to_json(config.space)},
                                          {"num_samples", config.sobol_samples},
                                          {"per_step", config.sobol_per_step},
                                          {"qoi", probes_to_json(config.probes)},
                                          {"model", model_hash(config, model)}});
  json existing;
  if (stage_up_to_date(dir, hash, &existing)) return {dir, true, existing};

  const auto start = Clock::now();
  const Mesh mesh = config.make_mesh();
  const QoiSet qois = resolve_qois(config, mesh);
  std::filesystem::create_directories(dir);

  const SaltelliDesign design = saltelli_design(config.space, config.sobol_samples, config.seed);
  std::vector<std::string> files = {"sobol.csv"};

  // Per-step analysis reuses one batch of evaluations for every step of the
  // first probe; the headline QoIs get their own pass.
  const auto fn = make_model(config, model);
  const Matrix outputs =
      evaluate_model(fn, design.points, static_cast<Index>(qois.names.size()), config.workers);
  const SobolResult result = sobol_indices(design, outputs);

  std::vector<std::vector<std::string>> rows;
  for (Index q = 0; q < result.first_order.cols(); ++q)
    for (Index i = 0; i < result.first_order.rows(); ++i)
      rows.push_back({config.space.names[static_cast<std::size_t>(i)],
                      qois.names[static_cast<std::size_t>(q)],
                      format_double(result.first_order(i, q)),
                      format_double(result.total_effect(i, q)),
                      format_double(result.first_order_se(i, q)),
                      format_double(result.total_effect_se(i, q)),
                      format_double(result.variance[q])});
  write_table(dir / "sobol.csv", {"input", "qoi", "s", "st", "s_se", "st_se", "variance"}, rows);

  json manifest{{"stage", "sobol"},
                {"model", model},
                {"seed", config.seed},
                {"config_hash", hash},
                {"num_samples", config.sobol_samples},
                {"evaluations", design.rows()},
                {"estimator", "jansen"},
                {"qois", qois.names}};

  if (config.sobol_per_step) {
    // Every time step of the first probe becomes a QoI column.
    const auto &probe0 = config.probes.front();
    StudyConfig per_step_config = config;
    per_step_config.probes = {QoiProbeConfig{probe0.base, {}}};
    for (int s = 1; s <= config.fom.num_steps(); ++s)
      per_step_config.probes[0].steps.push_back(s);
    const QoiSet step_qois = resolve_qois(per_step_config, mesh);
    const auto step_fn = make_model(per_step_config, model);
    const Matrix step_outputs = evaluate_model(
        step_fn, design.points, static_cast<Index>(step_qois.names.size()), config.workers);
    const SobolNumerators nums = sobol_numerators(design, step_outputs);

    Vector times(static_cast<Index>(step_qois.probe_times.size()));
    for (std::size_t i = 0; i < step_qois.probe_times.size(); ++i)
      times[static_cast<Index>(i)] = step_qois.probe_times[i];
    const TimeIntegratedSobol integrated =
        time_integrated_sobol(times, nums.closed, nums.total, nums.variance);

    std::vector<std::vector<std::string>> step_rows, int_rows;
    for (Index n = 0; n < times.size(); ++n)
      for (Index i = 0; i < nums.closed.rows(); ++i) {
        const double var = nums.variance[n];
        step_rows.push_back({config.space.names[static_cast<std::size_t>(i)],
                             std::to_string(n + 1), format_double(times[n]),
                             format_double(var > 0 ? nums.closed(i, n) / var
                                                   : std::numeric_limits<double>::quiet_NaN()),
                             format_double(var > 0 ? nums.total(i, n) / var
                                                   : std::numeric_limits<double>::quiet_NaN()),
                             format_double(var)});
        int_rows.push_back({config.space.names[static_cast<std::size_t>(i)],
                            std::to_string(n + 1), format_double(times[n]),
                            format_double(integrated.first_order(i, n)),
                            format_double(integrated.total_effect(i, n))});
      }
    write_table(dir / "sobol_steps.csv", {"input", "step", "time", "s", "st", "variance"},
                step_rows);
    write_table(dir / "sobol_integrated.csv", {"input", "step", "time", "s_cum", "st_cum"},
                int_rows);
    files.push_back("sobol_steps.csv");
    files.push_back("sobol_integrated.csv");
  }

  const json timings{{"total_seconds", seconds_since(start)}};
  return finish_stage(dir, std::move(manifest), std::move(files), timings);
}

StageResult cmd_mcmc(const StudyConfig &config, const std::string &model)
{
  const auto dir = config.output_dir / ("mcmc_" + model_dir_suffix(model));
  const ParameterSpace prior = config.mcmc_prior.value_or(config.space);
  const std::string hash = json_hash(json{{"stage", "mcmc"},
                                          {"seed", config.seed},
                                          {"space", parameter_space_to_json(config.space)},
                                          {"prior", parameter_space_to_json(prior)},
                                          {"iterations", config.mcmc.num_iterations},
                                          {"burn_in", config.mcmc.burn_in},
                                          {"thinning", config.mcmc.thinning},
                                          {"noise_variance", config.mcmc_noise_variance},
                                          {"qoi", probes_to_json(config.probes)},
                                          {"target", std::vector<double>(config.mcmc_target.data(),
                                                                         config.mcmc_target.data() +
                                                                             config.mcmc_target.size())},
                                          {"model", model_hash(config, model)}});
  json existing;
  if (stage_up_to_date(dir, hash, &existing)) return {dir, true, existing};

  const auto start = Clock::now();
  if (config.mcmc_target.size() != config.space.dim())
    throw Error("cmd_mcmc: target parameter vector is missing or has the wrong size");

  const Mesh mesh = config.make_mesh();
  const QoiSet qois = resolve_qois(config, mesh);
  std::filesystem::create_directories(dir);

  // Observations come from the full-order model at the target parameters,
  // with seeded synthetic noise.
  const auto fom_model = make_fom_qoi_model(config);
  const Vector y_true = fom_model(config.mcmc_target);
  Rng noise_rng = Rng(config.seed).substream("observation");
  Vector y_obs = y_true;
  const double noise_std = std::sqrt(config.mcmc_noise_variance);
  for (Index k = 0; k < y_obs.size(); ++k) y_obs[k] += noise_std * noise_rng.normal();

  InverseProblem problem;
  problem.forward = make_model(config, model);
  problem.y_obs = y_obs;
  problem.noise_variance = config.mcmc_noise_variance;
  problem.prior = prior;

  McmcConfig mc = config.mcmc;
  mc.seed = config.seed;
  if (mc.initial.size() == 0) mc.initial = 0.5 * (prior.lower + prior.upper);

  const Chain chain = metropolis_hastings(problem, mc);
  const ChainSummary summary = chain_summary(chain);

  std::vector<std::string> header = {"iteration", "accepted", "log_posterior"};
  for (const auto &name : config.space.names) header.push_back(name);
  Matrix chain_rows(chain.samples.rows(), static_cast<Index>(header.size()));
  for (Index it = 0; it < chain.samples.rows(); ++it) {
    chain_rows(it, 0) = static_cast<double>(it);
    chain_rows(it, 1) = static_cast<double>(chain.accepted_flags[static_cast<std::size_t>(it)]);
    chain_rows(it, 2) = chain.log_posterior[it];
    chain_rows.row(it).tail(config.space.dim()) = chain.samples.row(it);
  }
  write_csv(dir / "chain.csv", header, chain_rows);

  std::vector<std::vector<std::string>> kde_rows;
  for (Index j = 0; j < config.space.dim(); ++j) {
    const Kde &kde = summary.densities[static_cast<std::size_t>(j)];
    for (Index g = 0; g < kde.grid.size(); ++g)
      kde_rows.push_back({config.space.names[static_cast<std::size_t>(j)],
                          format_double(kde.grid[g]), format_double(kde.density[g])});
  }
  write_table(dir / "kde.csv", {"input", "grid", "density"}, kde_rows);

  json summary_doc{{"seed", config.seed},
                   {"config_hash", hash},
                   {"model", model},
                   {"acceptance_rate", chain.acceptance_rate()},
                   {"kept_samples", chain.kept.rows()},
                   {"noise_variance", config.mcmc_noise_variance},
                   {"y_obs", std::vector<double>(y_obs.data(), y_obs.data() + y_obs.size())},
                   {"target", std::vector<double>(config.mcmc_target.data(),
                                                  config.mcmc_target.data() + config.mcmc_target.size())}};
  for (Index j = 0; j < config.space.dim(); ++j) {
    summary_doc["posterior"][config.space.names[static_cast<std::size_t>(j)]] =
        json{{"mean", summary.mean[j]},
             {"std", summary.std[j]},
             {"q05", summary.quantiles(j, 0)},
             {"q50", summary.quantiles(j, 1)},
             {"q95", summary.quantiles(j, 2)}};
  }
  save_json(dir / "summary.json", summary_doc);

  json manifest{{"stage", "mcmc"},  {"model", model},
                {"seed", config.seed}, {"config_hash", hash},
                {"iterations", config.mcmc.num_iterations},
                {"burn_in", config.mcmc.burn_in},
                {"thinning", config.mcmc.thinning},
                {"kept_samples", chain.kept.rows()}};
  const json timings{{"total_seconds", seconds_since(start)}};
  return finish_stage(dir, std::move(manifest), {"chain.csv", "kde.csv", "summary.json"}, timings);
}

// ---------------------------------------------------------------------------
// Report.

StageResult cmd_report(const StudyConfig &config)
{
  const auto dir = config.output_dir;
  json report{{"seed", config.seed}};
  std::string md = "# Study report\n\n";

  const auto pod_table = dir / "pod" / "pod_table.csv";
  if (std::filesystem::exists(pod_table)) {
    const CsvFile table = read_csv(pod_table);
    report["pod_table"] = json::array();
    md += "## POD dimension vs tolerance\n\n| tolerance | N |\n|---|---|\n";
    for (Index r = 0; r < table.rows.rows(); ++r) {
      report["pod_table"].push_back({{"tolerance", table.rows(r, 0)}, {"dimension", table.rows(r, 1)}});
      md += "| " + format_double(table.rows(r, 0)) + " | " +
            std::to_string(static_cast<long long>(table.rows(r, 1))) + " |\n";
    }
    md += "\n";
  }

  for (const std::string variant : {"global", "td"}) {
    const auto summary_path = dir / ("evaluate_" + variant) / "summary.json";
    const auto timing_path = dir / ("evaluate_" + variant) / "timings.json";
    if (!std::filesystem::exists(summary_path)) continue;
    const json summary = load_json(summary_path);
    report["evaluate"][variant] = summary;
    md += "## ROM accuracy (" + variant + ")\n\n";
    md += "- mean tAE: " + format_double(summary.value("mean_tae", 0.0)) + "\n";
    md += "- mean tRE: " + format_double(summary.value("mean_tre", 0.0)) + "\n";
    md += "- projection mean tAE: " + format_double(summary.value("projection_mean_tae", 0.0)) + "\n";
    md += "- projection mean tRE: " + format_double(summary.value("projection_mean_tre", 0.0)) + "\n";
    if (std::filesystem::exists(timing_path)) {
      const json timings = load_json(timing_path);
      report["evaluate"][variant]["speedup"] = timings.value("speedup", 0.0);
      md += "- speed-up vs FOM: " + format_double(timings.value("speedup", 0.0)) + "\n";
    }
    md += "\n";
  }

  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("mcmc_", 0) == 0) {
      const auto summary_path = entry.path() / "summary.json";
      if (std::filesystem::exists(summary_path)) report[name] = load_json(summary_path);
    }
  }

  save_json(dir / "report.json", report);
  std::ofstream out(dir / "report.md", std::ios::trunc);
  out << md;
  return {dir, false, report};
}

}  // namespace romuq
