#include "romuq/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "romuq/error.hpp"

namespace romuq
{

namespace
{

// Local faces of the reference hexahedron, outward oriented.
constexpr std::array<std::array<int, 4>, 6> kHexFaces = {{
    {0, 4, 7, 3},  // x = -1
    {1, 2, 6, 5},  // x = +1
    {0, 1, 5, 4},  // y = -1
    {3, 7, 6, 2},  // y = +1
    {0, 3, 2, 1},  // z = -1
    {4, 5, 6, 7},  // z = +1
}};

constexpr std::array<std::array<double, 3>, 8> kHexNodeXi = {{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1}, {1, -1, 1}, {1, 1, 1}, {-1, 1, 1},
}};

std::array<int, 4> sorted_face(std::array<int, 4> f)
{
  std::sort(f.begin(), f.end());
  return f;
}

std::vector<double> gauss_points_1d(int order)
{
  switch (order) {
    case 1: return {0.0};
    case 2: return {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
    case 3: return {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
    default: throw Error("unsupported quadrature order " + std::to_string(order));
  }
}

}  // namespace

BoundaryTag boundary_tag_from_string(const std::string &name)
{
  if (name == "dirichlet") return BoundaryTag::Dirichlet;
  if (name == "pressure") return BoundaryTag::Pressure;
  if (name == "neumann") return BoundaryTag::Neumann;
  throw Error("unknown boundary tag: " + name);
}

std::string to_string(BoundaryTag tag)
{
  switch (tag) {
    case BoundaryTag::Dirichlet: return "dirichlet";
    case BoundaryTag::Pressure: return "pressure";
    default: return "neumann";
  }
}

std::vector<int> Mesh::dirichlet_vertices() const
{
  std::set<int> fixed;
  for (const auto &face : boundary_faces) {
    if (face.tag != BoundaryTag::Dirichlet) continue;
    fixed.insert(face.nodes.begin(), face.nodes.end());
  }
  return {fixed.begin(), fixed.end()};
}

std::vector<int> Mesh::dirichlet_dofs() const
{
  std::vector<int> dofs;
  for (int v : dirichlet_vertices())
    for (int c = 0; c < 3; ++c) dofs.push_back(3 * v + c);
  return dofs;
}

void Mesh::validate(int quadrature_order) const
{
  const int nv = static_cast<int>(num_vertices());
  const auto xi_1d = gauss_points_1d(quadrature_order);

  for (std::size_t e = 0; e < hexahedra.size(); ++e) {
    const auto &hex = hexahedra[e];
    std::set<int> unique(hex.begin(), hex.end());
    if (unique.size() != 8)
      throw Error("element " + std::to_string(e) + " has repeated vertices");
    for (int v : hex)
      if (v < 0 || v >= nv)
        throw Error("element " + std::to_string(e) + " references missing vertex " + std::to_string(v));

    Eigen::Matrix<double, 8, 3> coords;
    for (int a = 0; a < 8; ++a) coords.row(a) = vertices.row(hex[a]);
    for (double xi : xi_1d)
      for (double eta : xi_1d)
        for (double zeta : xi_1d) {
          Eigen::Matrix<double, 8, 3> dshape;
          for (int a = 0; a < 8; ++a) {
            const auto &s = kHexNodeXi[a];
            dshape(a, 0) = 0.125 * s[0] * (1 + s[1] * eta) * (1 + s[2] * zeta);
            dshape(a, 1) = 0.125 * (1 + s[0] * xi) * s[1] * (1 + s[2] * zeta);
            dshape(a, 2) = 0.125 * (1 + s[0] * xi) * (1 + s[1] * eta) * s[2];
          }
          const Matrix3 jac = coords.transpose() * dshape;
          if (jac.determinant() <= 0.0)
            throw Error("element " + std::to_string(e) + " has non-positive reference Jacobian");
        }
  }

  // Every exterior face exactly one tag, interior faces none.
  std::map<std::array<int, 4>, int> face_count;
  for (const auto &hex : hexahedra)
    for (const auto &local : kHexFaces) {
      std::array<int, 4> f = {hex[local[0]], hex[local[1]], hex[local[2]], hex[local[3]]};
      ++face_count[sorted_face(f)];
    }
  std::map<std::array<int, 4>, int> tagged;
  for (const auto &face : boundary_faces) ++tagged[sorted_face(face.nodes)];
  for (const auto &[key, n] : tagged) {
    auto it = face_count.find(key);
    if (it == face_count.end()) throw Error("tagged face does not belong to any element");
    if (it->second > 1) throw Error("interior face carries a boundary tag");
    if (n > 1) throw Error("exterior face carries more than one tag");
  }
  for (const auto &[key, n] : face_count)
    if (n == 1 && tagged.find(key) == tagged.end())
      throw Error("exterior face is missing a boundary tag");
}

std::uint64_t Mesh::content_hash() const
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_bytes = [&h](const void *data, std::size_t size) {
    const auto *p = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const Index nv = num_vertices();
  mix_bytes(&nv, sizeof(nv));
  for (Index i = 0; i < nv; ++i)
    for (Index j = 0; j < 3; ++j) {
      const double x = vertices(i, j);
      mix_bytes(&x, sizeof(x));
    }
  for (const auto &hex : hexahedra) mix_bytes(hex.data(), sizeof(hex));
  for (const auto &face : boundary_faces) {
    mix_bytes(face.nodes.data(), sizeof(face.nodes));
    const int t = static_cast<int>(face.tag);
    mix_bytes(&t, sizeof(t));
  }
  return h;
}

Mesh beam_mesh(const Vector3 &extent, int nx, int ny, int nz)
{
  if (nx < 1 || ny < 1 || nz < 1) throw Error("beam_mesh: subdivisions must be positive");
  if ((extent.array() <= 0.0).any()) throw Error("beam_mesh: extent must be positive");

  Mesh mesh;
  const int mx = nx + 1, my = ny + 1, mz = nz + 1;
  auto vid = [=](int i, int j, int k) { return i + mx * (j + my * k); };

  mesh.vertices.resize(static_cast<Index>(mx) * my * mz, 3);
  for (int k = 0; k < mz; ++k)
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < mx; ++i)
        mesh.vertices.row(vid(i, j, k)) << extent[0] * i / nx, extent[1] * j / ny, extent[2] * k / nz;

  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.hexahedra.push_back({vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k),
                                  vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j + 1, k + 1),
                                  vid(i, j + 1, k + 1)});

  // Exterior faces, ordered as in kHexFaces so reference normals point outward.
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) {
      mesh.boundary_faces.push_back(
          {{vid(0, j, k), vid(0, j, k + 1), vid(0, j + 1, k + 1), vid(0, j + 1, k)}, BoundaryTag::Dirichlet});
      mesh.boundary_faces.push_back(
          {{vid(nx, j, k), vid(nx, j + 1, k), vid(nx, j + 1, k + 1), vid(nx, j, k + 1)}, BoundaryTag::Neumann});
    }
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      mesh.boundary_faces.push_back(
          {{vid(i, 0, k), vid(i + 1, 0, k), vid(i + 1, 0, k + 1), vid(i, 0, k + 1)}, BoundaryTag::Neumann});
      mesh.boundary_faces.push_back(
          {{vid(i, ny, k), vid(i, ny, k + 1), vid(i + 1, ny, k + 1), vid(i + 1, ny, k)}, BoundaryTag::Neumann});
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      mesh.boundary_faces.push_back(
          {{vid(i, j, 0), vid(i, j + 1, 0), vid(i + 1, j + 1, 0), vid(i + 1, j, 0)}, BoundaryTag::Pressure});
      mesh.boundary_faces.push_back(
          {{vid(i, j, nz), vid(i + 1, j, nz), vid(i + 1, j + 1, nz), vid(i, j + 1, nz)}, BoundaryTag::Neumann});
    }
  return mesh;
}

}  // namespace romuq
