#include <doctest.h>

#include "romuq/error.hpp"
#include "romuq/mesh.hpp"

using namespace romuq;

TEST_CASE("beam mesh has the expected counts and tags")
{
  const Mesh mesh = beam_mesh(Vector3(1e-2, 1e-3, 1e-3), 10, 2, 2);
  CHECK(mesh.num_vertices() == 11 * 3 * 3);
  CHECK(mesh.num_elements() == 40);
  CHECK_NOTHROW(mesh.validate());

  int dirichlet = 0, pressure = 0, neumann = 0;
  for (const auto &face : mesh.boundary_faces) {
    switch (face.tag) {
      case BoundaryTag::Dirichlet: ++dirichlet; break;
      case BoundaryTag::Pressure: ++pressure; break;
      default: ++neumann; break;
    }
  }
  CHECK(dirichlet == 4);   // x = 0: 2x2 faces
  CHECK(pressure == 20);   // z = 0: 10x2 faces
  CHECK(neumann == 4 + 2 * 20 + 20);

  // Clamped face: all 9 vertices at x = 0.
  CHECK(mesh.dirichlet_vertices().size() == 9);
  for (int v : mesh.dirichlet_vertices()) CHECK(mesh.vertices(v, 0) == 0.0);
}

TEST_CASE("validate rejects repeated vertices in an element")
{
  Mesh mesh = beam_mesh(Vector3(1, 1, 1), 1, 1, 1);
  mesh.hexahedra[0][1] = mesh.hexahedra[0][0];
  CHECK_THROWS_AS(mesh.validate(), Error);
}

TEST_CASE("validate rejects a missing boundary tag")
{
  Mesh mesh = beam_mesh(Vector3(1, 1, 1), 1, 1, 1);
  mesh.boundary_faces.pop_back();
  CHECK_THROWS_AS(mesh.validate(), Error);
}

TEST_CASE("validate rejects a doubly tagged exterior face")
{
  Mesh mesh = beam_mesh(Vector3(1, 1, 1), 1, 1, 1);
  mesh.boundary_faces.push_back(mesh.boundary_faces.front());
  CHECK_THROWS_AS(mesh.validate(), Error);
}

TEST_CASE("validate rejects an interior tagged face")
{
  Mesh mesh = beam_mesh(Vector3(2, 1, 1), 2, 1, 1);
  // The shared face between the two elements.
  BoundaryFace face;
  face.nodes = {1, 4, 10, 7};
  face.tag = BoundaryTag::Neumann;
  mesh.boundary_faces.push_back(face);
  CHECK_THROWS_AS(mesh.validate(), Error);
}

TEST_CASE("validate rejects a negative-Jacobian element")
{
  Mesh mesh = beam_mesh(Vector3(1, 1, 1), 1, 1, 1);
  std::swap(mesh.hexahedra[0][0], mesh.hexahedra[0][4]);
  std::swap(mesh.hexahedra[0][1], mesh.hexahedra[0][5]);
  std::swap(mesh.hexahedra[0][2], mesh.hexahedra[0][6]);
  std::swap(mesh.hexahedra[0][3], mesh.hexahedra[0][7]);
  CHECK_THROWS_AS(mesh.validate(), Error);
}

TEST_CASE("content hash reacts to geometry changes")
{
  const Mesh a = beam_mesh(Vector3(1, 1, 1), 2, 1, 1);
  Mesh b = beam_mesh(Vector3(1, 1, 1), 2, 1, 1);
  CHECK(a.content_hash() == b.content_hash());
  b.vertices(0, 0) += 1e-9;
  CHECK(a.content_hash() != b.content_hash());
}
