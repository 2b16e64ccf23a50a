#include "tvc/records_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tvc/errors.hpp"
#include "tvc/mesh_io.hpp"

namespace tvc {
namespace {

using nlohmann::json;

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> flat_vec3(const std::vector<Vec3>& v) {
  std::vector<double> out;
  out.reserve(v.size() * 3);
  for (const auto& p : v) {
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
  }
  return out;
}

}  // namespace

void save_shape_record(const ShapeRecord& record, const std::string& dir,
                       const std::string& config_echo) {
  std::filesystem::create_directories(dir);

  struct Entry {
    std::string name;
    std::vector<double> values;
    std::vector<std::int64_t> shape;
  };
  std::vector<Entry> entries;
  entries.push_back({"surface_points", flat_vec3(record.surface.points),
                     {static_cast<std::int64_t>(record.surface.points.size()), 3}});
  entries.push_back({"surface_normals", flat_vec3(record.surface.normals),
                     {static_cast<std::int64_t>(record.surface.normals.size()), 3}});
  entries.push_back(
      {"template_index",
       std::vector<double>(record.surface.template_index.begin(),
                           record.surface.template_index.end()),
       {static_cast<std::int64_t>(record.surface.template_index.size())}});
  entries.push_back({"volume_points", flat_vec3(record.volume.points),
                     {static_cast<std::int64_t>(record.volume.points.size()), 3}});
  entries.push_back({"volume_sdf", record.volume.sdf,
                     {static_cast<std::int64_t>(record.volume.sdf.size())}});
  if (record.provenance) {
    entries.push_back({"prov_face",
                       std::vector<double>(record.provenance->face.begin(),
                                           record.provenance->face.end()),
                       {static_cast<std::int64_t>(record.provenance->face.size())}});
    entries.push_back({"prov_u", record.provenance->bary_u,
                       {static_cast<std::int64_t>(record.provenance->bary_u.size())}});
    entries.push_back({"prov_v", record.provenance->bary_v,
                       {static_cast<std::int64_t>(record.provenance->bary_v.size())}});
  }

  json arrays = json::array();
  std::size_t offset = 0;
  {
    std::ofstream bin(dir + "/arrays.bin", std::ios::binary);
    if (!bin) throw IoError("cannot write record arrays: " + dir);
    for (const auto& e : entries) {
      arrays.push_back({{"name", e.name},
                        {"shape", e.shape},
                        {"offset", offset},
                        {"count", e.values.size()}});
      write_doubles(bin, e.values);
      offset += e.values.size() * sizeof(double);
    }
    if (!bin) throw IoError("failed writing record arrays: " + dir);
  }

  if (record.source_mesh) save_mesh(*record.source_mesh, dir + "/mesh.off", MeshFormat::Off);

  json manifest = {{"id", record.id},
                   {"zeta", record.volume.zeta},
                   {"sdf_reliable", record.sdf_reliable},
                   {"has_mesh", record.source_mesh.has_value()},
                   {"arrays", arrays},
                   {"config", json::parse(config_echo.empty() ? "{}" : config_echo)}};
  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw IoError("cannot write record manifest: " + dir);
  mf << manifest.dump(2) << "\n";
  if (!mf) throw IoError("failed writing record manifest: " + dir);
}

ShapeRecord load_shape_record(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw IoError("cannot open record manifest: " + dir);
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::exception& e) {
    throw IoError("malformed record manifest: " + std::string(e.what()));
  }

  std::ifstream bin(dir + "/arrays.bin", std::ios::binary);
  if (!bin) throw IoError("cannot open record arrays: " + dir);
  bin.seekg(0, std::ios::end);
  std::size_t bytes = static_cast<std::size_t>(bin.tellg());
  bin.seekg(0);
  std::vector<double> blob(bytes / sizeof(double));
  bin.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(bytes));
  if (!bin) throw IoError("failed reading record arrays: " + dir);

  auto fetch = [&](const std::string& name, bool required) -> std::vector<double> {
    for (const auto& a : manifest.at("arrays")) {
      if (a.at("name").get<std::string>() != name) continue;
      std::size_t offset = a.at("offset").get<std::size_t>() / sizeof(double);
      std::size_t count = a.at("count").get<std::size_t>();
      if (offset + count > blob.size())
        throw ValidationError("record array '" + name + "' exceeds the blob");
      return std::vector<double>(blob.begin() + offset, blob.begin() + offset + count);
    }
    if (required) throw ValidationError("record is missing array '" + name + "'");
    return {};
  };
  auto to_vec3 = [](const std::vector<double>& v) {
    std::vector<Vec3> out(v.size() / 3);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
    return out;
  };

  ShapeRecord record;
  try {
    record.id = manifest.at("id").get<std::string>();
    record.volume.zeta = manifest.at("zeta").get<double>();
    record.sdf_reliable = manifest.at("sdf_reliable").get<bool>();
    record.surface.points = to_vec3(fetch("surface_points", true));
    record.surface.normals = to_vec3(fetch("surface_normals", true));
    std::vector<double> ti = fetch("template_index", true);
    record.surface.template_index.assign(ti.begin(), ti.end());
    record.volume.points = to_vec3(fetch("volume_points", true));
    record.volume.sdf = fetch("volume_sdf", true);
    std::vector<double> pf = fetch("prov_face", false);
    if (!pf.empty()) {
      SampleProvenance prov;
      prov.face.assign(pf.begin(), pf.end());
      prov.bary_u = fetch("prov_u", true);
      prov.bary_v = fetch("prov_v", true);
      record.provenance = std::move(prov);
    }
    if (manifest.at("has_mesh").get<bool>())
      record.source_mesh = load_mesh(dir + "/mesh.off", MeshFormat::Off);
  } catch (const json::exception& e) {
    throw ValidationError("record manifest is missing fields: " + std::string(e.what()));
  }
  return record;
}

}  // namespace tvc
