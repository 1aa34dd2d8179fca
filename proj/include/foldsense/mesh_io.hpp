#pragma once

#include "foldsense/geometry.hpp"

#include <iosfwd>
#include <string>

namespace foldsense {

enum class MeshFormat { Stl, Obj };

MeshFormat mesh_format_from_string(const std::string& s);  // "stl" | "obj"

/// ASCII export with fixed 9-significant-digit floats.
std::string export_mesh(const FoldMesh& mesh, MeshFormat format);
void write_mesh(const std::string& path, const FoldMesh& mesh, MeshFormat format);

/// Minimal ASCII readers, mainly for round-trip checks and the CLI.
FoldMesh import_stl(std::istream& in);
FoldMesh import_obj(std::istream& in);
FoldMesh read_mesh(const std::string& path);  // dispatch on extension

}  // namespace foldsense
