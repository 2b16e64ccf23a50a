#ifndef TVC_MESH_IO_HPP
#define TVC_MESH_IO_HPP

#include <string>

#include "tvc/mesh.hpp"

namespace tvc {

enum class MeshFormat { Off, Obj };

// Infers from the extension (.off / .obj); throws IoError otherwise.
MeshFormat mesh_format_from_path(const std::string& path);

// ASCII OFF / OBJ. OBJ faces are 1-based on disk, 0-based in memory.
TriangleMesh load_mesh(const std::string& path, MeshFormat format);
TriangleMesh load_mesh(const std::string& path);

void save_mesh(const TriangleMesh& mesh, const std::string& path, MeshFormat format);
void save_mesh(const TriangleMesh& mesh, const std::string& path);

PointCloud load_point_cloud_xyz(const std::string& path);
void save_point_cloud_xyz(const PointCloud& cloud, const std::string& path);

}  // namespace tvc

#endif
