#ifndef ROMUQ_MESH_HPP
#define ROMUQ_MESH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "romuq/types.hpp"

namespace romuq
{

enum class BoundaryTag
{
  Dirichlet,  // clamped: all displacement components fixed to zero
  Pressure,   // follower pressure load
  Neumann,    // traction free
};

BoundaryTag boundary_tag_from_string(const std::string &name);
std::string to_string(BoundaryTag tag);

// Quadrilateral boundary face. Nodes are ordered counterclockwise seen from
// outside the body, so the bilinear tangents give an outward reference normal.
struct BoundaryFace
{
  std::array<int, 4> nodes;
  BoundaryTag tag;
};

// Hexahedral mesh in the reference configuration. Element nodes follow the
// VTK ordering (bottom quad counterclockwise, then top quad).
struct Mesh
{
  Matrix vertices;  // num_vertices x 3, meters
  std::vector<std::array<int, 8>> hexahedra;
  std::vector<BoundaryFace> boundary_faces;

  Index num_vertices() const { return vertices.rows(); }
  Index num_elements() const { return static_cast<Index>(hexahedra.size()); }
  Index num_dofs() const { return 3 * num_vertices(); }

  // Vertices lying on at least one Dirichlet face, ascending.
  std::vector<int> dirichlet_vertices() const;
  // All three components of each Dirichlet vertex, ascending.
  std::vector<int> dirichlet_dofs() const;

  // Checks connectivity, positive Jacobians at the reference quadrature
  // points, and that exterior faces carry exactly one tag while interior
  // faces carry none. Throws Error on the first violation.
  void validate(int quadrature_order = 2) const;

  std::uint64_t content_hash() const;
};

// Structured box mesh on [0,extent.x] x [0,extent.y] x [0,extent.z] with the
// clamped-beam tagging: x=0 Dirichlet, z=0 Pressure, every other exterior
// face Neumann.
Mesh beam_mesh(const Vector3 &extent, int nx, int ny, int nz);

}  // namespace romuq

#endif  // ROMUQ_MESH_HPP
