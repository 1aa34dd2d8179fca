#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "foldsense/errors.hpp"
#include "foldsense/geometry.hpp"
#include "foldsense/mesh_io.hpp"

#include <sstream>

using namespace foldsense;

namespace {

FoldMesh unit_triangle() {
    FoldMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    m.faces = {{0, 1, 2}};
    m.tags = {{}};
    return m;
}

}  // namespace

TEST_CASE("empty mesh exports a valid zero-facet STL") {
    FoldMesh m;
    const std::string stl = export_mesh(m, MeshFormat::Stl);
    CHECK(stl.find("solid") == 0);
    CHECK(stl.find("facet") == std::string::npos);
    std::istringstream in(stl);
    auto back = import_stl(in);
    CHECK(back.faces.empty());
}

TEST_CASE("unit triangle: one facet with the hand-computed normal") {
    const std::string stl = export_mesh(unit_triangle(), MeshFormat::Stl);
    // CCW triangle in the z = 0 plane: normal must be +z.
    CHECK(stl.find("facet normal 0 0 1") != std::string::npos);
    std::istringstream in(stl);
    auto back = import_stl(in);
    REQUIRE(back.faces.size() == 1);
    CHECK(back.vertices.size() == 3);
}

TEST_CASE("exports are deterministic") {
    auto mesh = assemble(OrigamiParams{});
    CHECK(export_mesh(mesh, MeshFormat::Stl) == export_mesh(mesh, MeshFormat::Stl));
    CHECK(export_mesh(mesh, MeshFormat::Obj) == export_mesh(mesh, MeshFormat::Obj));
}

TEST_CASE("STL round trip reproduces the bounding box") {
    auto mesh = assemble(OrigamiParams{});
    std::istringstream in(export_mesh(mesh, MeshFormat::Stl));
    auto back = import_stl(in);
    auto [alo, ahi] = mesh.bounding_box();
    auto [blo, bhi] = back.bounding_box();
    CHECK((alo - blo).norm() < 1e-6);
    CHECK((ahi - bhi).norm() < 1e-6);
    CHECK(back.faces.size() == mesh.faces.size());
    CHECK(back.vertices.size() == mesh.vertices.size());
}

TEST_CASE("OBJ round trip preserves the vertex list") {
    auto mesh = assemble(OrigamiParams{});
    std::istringstream in(export_mesh(mesh, MeshFormat::Obj));
    auto back = import_obj(in);
    REQUIRE(back.vertices.size() == mesh.vertices.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < back.vertices.size(); ++i)
        worst = std::max(worst, (back.vertices[i] - mesh.vertices[i]).norm());
    CHECK(worst < 1e-6);
    CHECK(back.faces == mesh.faces);
}

TEST_CASE("format parsing") {
    CHECK(mesh_format_from_string("stl") == MeshFormat::Stl);
    CHECK(mesh_format_from_string("obj") == MeshFormat::Obj);
    CHECK_THROWS_AS(mesh_format_from_string("ply"), ValidationError);
}
