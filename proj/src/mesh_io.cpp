#include "tvc/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "tvc/errors.hpp"

namespace tvc {
namespace {

std::string lower_ext(const std::string& path) {
  auto pos = path.rfind('.');
  if (pos == std::string::npos) return "";
  std::string ext = path.substr(pos + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

// Next non-empty line with comments ('#') stripped.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    if (!blank) return true;
  }
  return false;
}

TriangleMesh load_off(std::istream& in, const std::string& path) {
  std::string line;
  if (!next_content_line(in, line)) throw IoError("empty OFF file: " + path);
  {
    std::istringstream ls(line);
    std::string magic;
    ls >> magic;
    if (magic != "OFF") throw IoError("missing OFF header in " + path);
    // Counts may follow the magic on the same line.
    long nv = -1, nf = -1, ne = 0;
    if (ls >> nv >> nf >> ne) {
      line.clear();
    } else {
      if (!next_content_line(in, line)) throw IoError("truncated OFF header in " + path);
      std::istringstream cs(line);
      if (!(cs >> nv >> nf >> ne)) throw IoError("malformed OFF counts in " + path);
    }
    TriangleMesh mesh;
    if (nv <= 0) throw ValidationError("OFF file declares no vertices: " + path);
    mesh.vertices.reserve(nv);
    for (long i = 0; i < nv; ++i) {
      if (!next_content_line(in, line)) throw IoError("truncated OFF vertex list in " + path);
      std::istringstream vs(line);
      Vec3 v;
      if (!(vs >> v.x >> v.y >> v.z)) throw IoError("malformed OFF vertex line: '" + line + "'");
      mesh.vertices.push_back(v);
    }
    mesh.faces.reserve(nf);
    for (long i = 0; i < nf; ++i) {
      if (!next_content_line(in, line)) throw IoError("truncated OFF face list in " + path);
      std::istringstream fs(line);
      int k;
      if (!(fs >> k)) throw IoError("malformed OFF face line: '" + line + "'");
      if (k != 3) throw ValidationError("only triangle faces are supported (got " +
                                        std::to_string(k) + "-gon) in " + path);
      std::array<int, 3> f{};
      if (!(fs >> f[0] >> f[1] >> f[2])) throw IoError("malformed OFF face line: '" + line + "'");
      mesh.faces.push_back(f);
    }
    validate_mesh(mesh);
    return mesh;
  }
}

int parse_obj_index(const std::string& token, int vertex_count, const std::string& path) {
  // "f" entries may be v, v/vt, v/vt/vn or v//vn; only the vertex index is used.
  std::size_t slash = token.find('/');
  std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  int idx = 0;
  try {
    idx = std::stoi(head);
  } catch (...) {
    throw IoError("malformed OBJ face index '" + token + "' in " + path);
  }
  if (idx < 0) idx = vertex_count + idx + 1;  // negative indices count from the end
  if (idx < 1) throw IoError("OBJ face index out of range: '" + token + "' in " + path);
  return idx - 1;
}

TriangleMesh load_obj(std::istream& in, const std::string& path) {
  TriangleMesh mesh;
  std::string line;
  while (next_content_line(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) throw IoError("malformed OBJ vertex line: '" + line + "'");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) idx.push_back(parse_obj_index(tok, mesh.vertex_count(), path));
      if (idx.size() < 3) throw IoError("OBJ face with fewer than 3 vertices: '" + line + "'");
      // Fan-triangulate polygons.
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
    // vn/vt/usemtl/etc. ignored
  }
  validate_mesh(mesh);
  return mesh;
}

}  // namespace

MeshFormat mesh_format_from_path(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "off") return MeshFormat::Off;
  if (ext == "obj") return MeshFormat::Obj;
  throw IoError("cannot infer mesh format from extension: " + path);
}

TriangleMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  return format == MeshFormat::Off ? load_off(in, path) : load_obj(in, path);
}

TriangleMesh load_mesh(const std::string& path) {
  return load_mesh(path, mesh_format_from_path(path));
}

void save_mesh(const TriangleMesh& mesh, const std::string& path, MeshFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file: " + path);
  out << std::setprecision(17);
  if (format == MeshFormat::Off) {
    out << "OFF\n" << mesh.vertex_count() << " " << mesh.face_count() << " 0\n";
    for (const auto& v : mesh.vertices) out << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& f : mesh.faces) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  } else {
    for (const auto& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& f : mesh.faces)
      out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  }
  if (!out) throw IoError("failed writing mesh file: " + path);
}

void save_mesh(const TriangleMesh& mesh, const std::string& path) {
  save_mesh(mesh, path, mesh_format_from_path(path));
}

PointCloud load_point_cloud_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open point cloud file: " + path);
  PointCloud cloud;
  std::string line;
  while (next_content_line(in, line)) {
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x >> p.y >> p.z)) throw IoError("malformed point line: '" + line + "'");
    cloud.points.push_back(p);
  }
  if (cloud.points.empty()) throw ValidationError("point cloud is empty: " + path);
  return cloud;
}

void save_point_cloud_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write point cloud file: " + path);
  out << std::setprecision(17);
  for (const auto& p : cloud.points) out << p.x << " " << p.y << " " << p.z << "\n";
  if (!out) throw IoError("failed writing point cloud file: " + path);
}

}  // namespace tvc
