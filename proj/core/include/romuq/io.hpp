#ifndef ROMUQ_IO_HPP
#define ROMUQ_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "romuq/fom.hpp"
#include "romuq/gpr.hpp"
#include "romuq/mesh.hpp"
#include "romuq/pod.hpp"
#include "romuq/types.hpp"

namespace romuq
{

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Binary matrix container ("ROMUQBIN"): 8-byte magic, u32 version, u32 pad,
// u64 rows, u64 cols, f64 dt, then rows*cols little-endian f64 column-major.

struct MatrixFile
{
  Matrix data;
  double dt = 0.0;
};

void write_matrix(const std::filesystem::path &path, const Matrix &data, double dt = 0.0);
MatrixFile read_matrix(const std::filesystem::path &path);

// ---------------------------------------------------------------------------
// CSV with one header row; numbers are written round-trip exact.

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const Matrix &rows);

struct CsvFile
{
  std::vector<std::string> header;
  Matrix rows;
};
CsvFile read_csv(const std::filesystem::path &path);

std::string format_double(double value);

// ---------------------------------------------------------------------------
// JSON helpers (pretty, stable key order on write).

json load_json(const std::filesystem::path &path);
void save_json(const std::filesystem::path &path, const json &doc);

std::uint64_t fnv1a_hash(std::string_view bytes);
std::string hash_hex(std::uint64_t value);
// Hash of a canonical (sorted-key) dump, for config fingerprints.
std::string json_hash(const json &doc);

// ---------------------------------------------------------------------------
// Domain objects. Every binary artifact gets a JSON sidecar at <path>.json
// carrying provenance (at least seed and config hash, via `extra`).

void save_trajectory(const std::filesystem::path &path, const Trajectory &traj, const json &extra);
Trajectory load_trajectory(const std::filesystem::path &path);

void save_basis(const std::filesystem::path &path, const ReducedBasis &basis, const json &extra);
ReducedBasis load_basis(const std::filesystem::path &path);

// GP files: <base>.json (hyperparameters, scalers, prior mean) and <base>.bin
// (training inputs stacked over alpha^T).
void save_gp(const std::filesystem::path &base, const TrainedGp &gp, const json &extra);
TrainedGp load_gp(const std::filesystem::path &base);

// Mesh and solver config from a structured JSON document: either
// {"extent": [lx,ly,lz], "divisions": [nx,ny,nz]} for the clamped beam or an
// explicit {"vertices": [...], "hexahedra": [...], "boundary_faces": [...]}.
Mesh mesh_from_json(const json &doc);
json mesh_to_json_structured(const Vector3 &extent, int nx, int ny, int nz);
FomConfig fom_config_from_json(const json &doc);

ParameterSpace parameter_space_from_json(const json &doc);
json parameter_space_to_json(const ParameterSpace &space);

}  // namespace romuq

#endif  // ROMUQ_IO_HPP
