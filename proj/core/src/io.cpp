#include "romuq/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "romuq/error.hpp"

namespace romuq
{

namespace
{

constexpr char kMagic[8] = {'R', 'O', 'M', 'U', 'Q', 'B', 'I', 'N'};
constexpr std::uint32_t kVersion = 1;

void write_bytes(std::ofstream &out, const void *data, std::size_t size)
{
  out.write(static_cast<const char *>(data), static_cast<std::streamsize>(size));
}

void read_bytes(std::ifstream &in, void *data, std::size_t size, const std::string &what)
{
  in.read(static_cast<char *>(data), static_cast<std::streamsize>(size));
  if (!in) throw IoError("truncated file while reading " + what);
}

Scaler scaler_from_json(const json &doc)
{
  const auto shift = doc.at("shift").get<std::vector<double>>();
  const auto scale = doc.at("scale").get<std::vector<double>>();
  return Scaler::from_stats(scaler_kind_from_string(doc.at("kind").get<std::string>()),
                            Eigen::Map<const Vector>(shift.data(), static_cast<Index>(shift.size())),
                            Eigen::Map<const Vector>(scale.data(), static_cast<Index>(scale.size())));
}

json scaler_to_json(const Scaler &scaler)
{
  return json{{"kind", to_string(scaler.kind())},
              {"shift", std::vector<double>(scaler.shift().data(), scaler.shift().data() + scaler.shift().size())},
              {"scale", std::vector<double>(scaler.scale().data(), scaler.scale().data() + scaler.scale().size())}};
}

std::vector<double> to_std(const Vector &v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double> &v)
{
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

void write_matrix(const std::filesystem::path &path, const Matrix &data, double dt)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_bytes(out, kMagic, sizeof(kMagic));
  const std::uint32_t version = kVersion, pad = 0;
  write_bytes(out, &version, sizeof(version));
  write_bytes(out, &pad, sizeof(pad));
  const std::uint64_t rows = static_cast<std::uint64_t>(data.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(data.cols());
  write_bytes(out, &rows, sizeof(rows));
  write_bytes(out, &cols, sizeof(cols));
  write_bytes(out, &dt, sizeof(dt));
  write_bytes(out, data.data(), sizeof(double) * data.size());
  if (!out) throw IoError("failed writing " + path.string());
}

MatrixFile read_matrix(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  read_bytes(in, magic, sizeof(magic), path.string());
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError(path.string() + " is not a ROMUQBIN container");
  std::uint32_t version = 0, pad = 0;
  read_bytes(in, &version, sizeof(version), path.string());
  read_bytes(in, &pad, sizeof(pad), path.string());
  if (version != kVersion) throw IoError(path.string() + ": unsupported container version");
  std::uint64_t rows = 0, cols = 0;
  read_bytes(in, &rows, sizeof(rows), path.string());
  read_bytes(in, &cols, sizeof(cols), path.string());
  MatrixFile file;
  read_bytes(in, &file.dt, sizeof(file.dt), path.string());
  file.data.resize(static_cast<Index>(rows), static_cast<Index>(cols));
  read_bytes(in, file.data.data(), sizeof(double) * file.data.size(), path.string());
  return file;
}

std::string format_double(double value)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const Matrix &rows)
{
  if (header.size() != static_cast<std::size_t>(rows.cols()) && rows.size() != 0)
    throw IoError("write_csv: header does not match the column count");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (Index r = 0; r < rows.rows(); ++r) {
    for (Index c = 0; c < rows.cols(); ++c)
      out << (c ? "," : "") << format_double(rows(r, c));
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

CsvFile read_csv(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvFile file;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  std::stringstream head(line);
  std::string cell;
  while (std::getline(head, cell, ',')) file.header.push_back(cell);

  std::vector<std::vector<double>> data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != file.header.size())
      throw IoError(path.string() + ": ragged row " + std::to_string(data.size() + 2));
    data.push_back(std::move(values));
  }
  file.rows.resize(static_cast<Index>(data.size()), static_cast<Index>(file.header.size()));
  for (std::size_t r = 0; r < data.size(); ++r)
    for (std::size_t c = 0; c < data[r].size(); ++c)
      file.rows(static_cast<Index>(r), static_cast<Index>(c)) = data[r][c];
  return file;
}

json load_json(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception &err) {
    throw IoError(path.string() + ": " + err.what());
  }
  return doc;
}

void save_json(const std::filesystem::path &path, const json &doc)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

std::uint64_t fnv1a_hash(std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t value)
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string json_hash(const json &doc)
{
  return hash_hex(fnv1a_hash(doc.dump()));  // nlohmann::json keeps keys sorted
}

void save_trajectory(const std::filesystem::path &path, const Trajectory &traj, const json &extra)
{
  const double dt = traj.times.size() > 0 ? traj.times[0] : 0.0;
  write_matrix(path, traj.dofs_per_step, dt);
  json side = extra;
  side["kind"] = "trajectory";
  side["num_dofs"] = traj.num_dofs();
  side["num_steps"] = traj.num_steps();
  side["dt"] = dt;
  side["mu"] = to_std(traj.mu);
  save_json(path.string() + ".json", side);
}

Trajectory load_trajectory(const std::filesystem::path &path)
{
  const MatrixFile file = read_matrix(path);
  Trajectory traj;
  traj.dofs_per_step = file.data;
  traj.times.resize(file.data.cols());
  for (Index n = 0; n < traj.times.size(); ++n) traj.times[n] = file.dt * static_cast<double>(n + 1);
  const auto sidecar = path.string() + ".json";
  if (std::filesystem::exists(sidecar)) {
    const json side = load_json(sidecar);
    if (side.contains("mu")) traj.mu = from_std(side.at("mu").get<std::vector<double>>());
  }
  return traj;
}

void save_basis(const std::filesystem::path &path, const ReducedBasis &basis, const json &extra)
{
  write_matrix(path, basis.modes, 0.0);
  json side = extra;
  side["kind"] = "basis";
  side["num_dofs"] = basis.num_dofs();
  side["dimension"] = basis.dimension();
  side["tolerance_used"] = basis.tolerance_used;
  side["singular_values"] = to_std(basis.singular_values);
  save_json(path.string() + ".json", side);
}

ReducedBasis load_basis(const std::filesystem::path &path)
{
  ReducedBasis basis;
  basis.modes = read_matrix(path).data;
  const json side = load_json(path.string() + ".json");
  basis.singular_values = from_std(side.at("singular_values").get<std::vector<double>>());
  basis.tolerance_used = side.value("tolerance_used", 0.0);
  return basis;
}

void save_gp(const std::filesystem::path &base, const TrainedGp &gp, const json &extra)
{
  const auto &spec = gp.kernel();
  json doc = extra;
  doc["kernel"] = {{"kind", to_string(spec.kind)},
                   {"signal_std", spec.signal_std},
                   {"length_scales", to_std(spec.length_scales)},
                   {"degree", spec.degree},
                   {"offset", spec.offset}};
  doc["noise_std"] = gp.noise_std();
  doc["prior_mean"] = gp.prior_mean();
  doc["log_marginal"] = gp.log_marginal();
  doc["input_scaler"] = scaler_to_json(gp.input_scaler());
  doc["output_scaler"] = scaler_to_json(gp.output_scaler());
  doc["num_points"] = gp.num_points();
  doc["input_dim"] = gp.input_dim();
  doc["blob"] = base.filename().string() + ".bin";
  save_json(base.string() + ".json", doc);

  Matrix blob(gp.input_dim() + 1, gp.num_points());
  blob.topRows(gp.input_dim()) = gp.training_inputs();
  blob.row(gp.input_dim()) = gp.alpha().transpose();
  write_matrix(base.string() + ".bin", blob, 0.0);
}

TrainedGp load_gp(const std::filesystem::path &base)
{
  const json doc = load_json(base.string() + ".json");
  const json &k = doc.at("kernel");
  KernelSpec spec;
  spec.kind = kernel_kind_from_string(k.at("kind").get<std::string>());
  spec.signal_std = k.at("signal_std").get<double>();
  spec.length_scales = from_std(k.at("length_scales").get<std::vector<double>>());
  spec.degree = k.at("degree").get<int>();
  spec.offset = k.at("offset").get<double>();

  const Matrix blob = read_matrix(base.parent_path() / doc.at("blob").get<std::string>()).data;
  const Index d = doc.at("input_dim").get<Index>();
  if (blob.rows() != d + 1) throw IoError(base.string() + ".bin: blob shape mismatch");
  const Matrix x = blob.topRows(d);
  const Vector alpha = blob.row(d).transpose();

  return TrainedGp::restore(spec, doc.at("noise_std").get<double>(), x, alpha,
                            doc.at("prior_mean").get<double>(), doc.at("log_marginal").get<double>(),
                            scaler_from_json(doc.at("input_scaler")),
                            scaler_from_json(doc.at("output_scaler")));
}

Mesh mesh_from_json(const json &doc)
{
  if (doc.contains("extent")) {
    const auto extent = doc.at("extent").get<std::vector<double>>();
    const auto div = doc.at("divisions").get<std::vector<int>>();
    if (extent.size() != 3 || div.size() != 3)
      throw IoError("mesh: extent and divisions must have three entries");
    return beam_mesh(Vector3(extent[0], extent[1], extent[2]), div[0], div[1], div[2]);
  }
  Mesh mesh;
  const auto vertices = doc.at("vertices").get<std::vector<std::vector<double>>>();
  mesh.vertices.resize(static_cast<Index>(vertices.size()), 3);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].size() != 3) throw IoError("mesh: vertex " + std::to_string(i) + " is not 3D");
    for (int j = 0; j < 3; ++j) mesh.vertices(static_cast<Index>(i), j) = vertices[i][j];
  }
  for (const auto &hex : doc.at("hexahedra")) {
    const auto nodes = hex.get<std::vector<int>>();
    if (nodes.size() != 8) throw IoError("mesh: hexahedron must list 8 vertices");
    std::array<int, 8> conn;
    std::copy(nodes.begin(), nodes.end(), conn.begin());
    mesh.hexahedra.push_back(conn);
  }
  for (const auto &face : doc.at("boundary_faces")) {
    const auto nodes = face.at("nodes").get<std::vector<int>>();
    if (nodes.size() != 4) throw IoError("mesh: boundary face must list 4 vertices");
    BoundaryFace bf;
    std::copy(nodes.begin(), nodes.end(), bf.nodes.begin());
    bf.tag = boundary_tag_from_string(face.at("tag").get<std::string>());
    mesh.boundary_faces.push_back(bf);
  }
  mesh.validate();
  return mesh;
}

json mesh_to_json_structured(const Vector3 &extent, int nx, int ny, int nz)
{
  return json{{"extent", {extent[0], extent[1], extent[2]}}, {"divisions", {nx, ny, nz}}};
}

FomConfig fom_config_from_json(const json &doc)
{
  FomConfig config;
  config.dt = doc.value("dt", config.dt);
  config.t_final = doc.value("t_final", config.t_final);
  config.newton_tol = doc.value("newton_tol", config.newton_tol);
  config.newton_max_iter = doc.value("newton_max_iter", config.newton_max_iter);
  config.quadrature_order = doc.value("quadrature_order", config.quadrature_order);
  config.density = doc.value("density", config.density);
  config.validate();
  return config;
}

ParameterSpace parameter_space_from_json(const json &doc)
{
  ParameterSpace space;
  space.names = doc.at("names").get<std::vector<std::string>>();
  space.lower = from_std(doc.at("lower").get<std::vector<double>>());
  space.upper = from_std(doc.at("upper").get<std::vector<double>>());
  space.validate();
  return space;
}

json parameter_space_to_json(const ParameterSpace &space)
{
  return json{{"names", space.names}, {"lower", to_std(space.lower)}, {"upper", to_std(space.upper)}};
}

}  // namespace romuq
