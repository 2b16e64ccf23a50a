#include "tvc/checkpoint.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tvc/errors.hpp"
#include "tvc/trainer.hpp"

namespace tvc {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

struct BlobWriter {
  std::vector<double> data;
  json manifest_arrays = json::array();

  void add(const std::string& name, const std::vector<double>& values,
           std::vector<std::int64_t> shape) {
    std::int64_t expect = 1;
    for (auto s : shape) expect *= s;
    if (expect != static_cast<std::int64_t>(values.size()))
      throw ValidationError("array '" + name + "' shape does not match its length");
    manifest_arrays.push_back({{"name", name},
                               {"shape", shape},
                               {"offset", data.size() * sizeof(double)},
                               {"count", values.size()}});
    data.insert(data.end(), values.begin(), values.end());
  }
};

class BlobReader {
 public:
  BlobReader(const json& manifest, const std::string& blob_path) {
    std::ifstream in(blob_path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint blob: " + blob_path);
    in.seekg(0, std::ios::end);
    std::size_t bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    if (bytes % sizeof(double) != 0) throw IoError("checkpoint blob size is not a multiple of 8");
    data_.resize(bytes / sizeof(double));
    in.read(reinterpret_cast<char*>(data_.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw IoError("failed reading checkpoint blob: " + blob_path);

    std::size_t expected_offset = 0;
    for (const auto& a : manifest.at("arrays")) {
      Entry e;
      e.offset = a.at("offset").get<std::size_t>();
      e.count = a.at("count").get<std::size_t>();
      std::int64_t prod = 1;
      for (auto s : a.at("shape")) prod *= s.get<std::int64_t>();
      if (prod != static_cast<std::int64_t>(e.count))
        throw ValidationError("checkpoint manifest: array '" + a.at("name").get<std::string>() +
                              "' shape does not multiply to its count");
      if (e.offset != expected_offset)
        throw ValidationError("checkpoint manifest: overlapping or gapped array offsets at '" +
                              a.at("name").get<std::string>() + "'");
      expected_offset = e.offset + e.count * sizeof(double);
      entries_[a.at("name").get<std::string>()] = e;
    }
    if (expected_offset != bytes)
      throw ValidationError("checkpoint blob length does not match the manifest");
  }

  std::vector<double> get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ValidationError("checkpoint is missing array '" + name + "'");
    const Entry& e = it->second;
    std::size_t begin = e.offset / sizeof(double);
    return std::vector<double>(data_.begin() + begin, data_.begin() + begin + e.count);
  }

  bool has(const std::string& name) const { return entries_.count(name) > 0; }

 private:
  struct Entry {
    std::size_t offset = 0, count = 0;
  };
  std::vector<double> data_;
  std::map<std::string, Entry> entries_;
};

json spec_to_json(const MlpSpec& spec) {
  return {{"layer_sizes", spec.layer_sizes},
          {"activation", spec.activation.kind == ActivationKind::Sine ? "sine" : "relu"},
          {"omega0", spec.activation.omega0},
          {"dropout", spec.dropout_rate}};
}

MlpSpec spec_from_json(const json& j) {
  MlpSpec spec;
  spec.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  std::string act = j.at("activation").get<std::string>();
  if (act == "sine")
    spec.activation.kind = ActivationKind::Sine;
  else if (act == "relu")
    spec.activation.kind = ActivationKind::Relu;
  else
    throw ValidationError("unknown activation in checkpoint: " + act);
  spec.activation.omega0 = j.at("omega0").get<double>();
  spec.dropout_rate = j.at("dropout").get<double>();
  return spec;
}

json hypernet_to_json(const HyperNet& h) {
  json blocks = json::array();
  for (const auto& bs : h.block_specs) blocks.push_back(spec_to_json(bs));
  return {{"latent_dim", h.latent_dim},
          {"target_spec", spec_to_json(h.target_spec)},
          {"block_specs", blocks}};
}

HyperNet hypernet_from_json(const json& j) {
  HyperNet h;
  h.latent_dim = j.at("latent_dim").get<int>();
  h.target_spec = spec_from_json(j.at("target_spec"));
  for (const auto& bj : j.at("block_specs")) {
    MlpSpec bs = spec_from_json(bj);
    h.block_specs.push_back(bs);
    h.blocks.push_back(zero_params(bs));
  }
  return h;
}

std::vector<double> vec3s_to_flat(const std::vector<Vec3>& v) {
  std::vector<double> out;
  out.reserve(v.size() * 3);
  for (const auto& p : v) {
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
  }
  return out;
}

std::vector<Vec3> flat_to_vec3s(const std::vector<double>& v) {
  if (v.size() % 3 != 0) throw ValidationError("vec3 array length is not a multiple of 3");
  std::vector<Vec3> out(v.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
  return out;
}

std::vector<double> ints_to_flat(const std::vector<int>& v) {
  return std::vector<double>(v.begin(), v.end());
}

std::vector<int> flat_to_ints(const std::vector<double>& v) {
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<int>(v[i]);
  return out;
}

void add_record_arrays(BlobWriter& w, const std::string& prefix, const ShapeRecord& r) {
  w.add(prefix + "surface_points", vec3s_to_flat(r.surface.points),
        {static_cast<std::int64_t>(r.surface.points.size()), 3});
  w.add(prefix + "surface_normals", vec3s_to_flat(r.surface.normals),
        {static_cast<std::int64_t>(r.surface.normals.size()), 3});
  w.add(prefix + "template_index", ints_to_flat(r.surface.template_index),
        {static_cast<std::int64_t>(r.surface.template_index.size())});
  w.add(prefix + "volume_points", vec3s_to_flat(r.volume.points),
        {static_cast<std::int64_t>(r.volume.points.size()), 3});
  w.add(prefix + "volume_sdf", r.volume.sdf, {static_cast<std::int64_t>(r.volume.sdf.size())});
  if (r.provenance) {
    w.add(prefix + "prov_face", ints_to_flat(r.provenance->face),
          {static_cast<std::int64_t>(r.provenance->face.size())});
    w.add(prefix + "prov_u", r.provenance->bary_u,
          {static_cast<std::int64_t>(r.provenance->bary_u.size())});
    w.add(prefix + "prov_v", r.provenance->bary_v,
          {static_cast<std::int64_t>(r.provenance->bary_v.size())});
  }
  if (r.source_mesh) {
    w.add(prefix + "mesh_vertices", vec3s_to_flat(r.source_mesh->vertices),
          {static_cast<std::int64_t>(r.source_mesh->vertices.size()), 3});
    std::vector<int> fi;
    fi.reserve(r.source_mesh->faces.size() * 3);
    for (const auto& f : r.source_mesh->faces) {
      fi.push_back(f[0]);
      fi.push_back(f[1]);
      fi.push_back(f[2]);
    }
    w.add(prefix + "mesh_faces", ints_to_flat(fi),
          {static_cast<std::int64_t>(r.source_mesh->faces.size()), 3});
  }
}

ShapeRecord read_record_arrays(const BlobReader& r, const std::string& prefix, const json& meta) {
  ShapeRecord rec;
  rec.id = meta.at("id").get<std::string>();
  rec.sdf_reliable = meta.at("sdf_reliable").get<bool>();
  rec.volume.zeta = meta.at("zeta").get<double>();
  rec.surface.points = flat_to_vec3s(r.get(prefix + "surface_points"));
  rec.surface.normals = flat_to_vec3s(r.get(prefix + "surface_normals"));
  rec.surface.template_index = flat_to_ints(r.get(prefix + "template_index"));
  rec.volume.points = flat_to_vec3s(r.get(prefix + "volume_points"));
  rec.volume.sdf = r.get(prefix + "volume_sdf");
  if (r.has(prefix + "prov_face")) {
    SampleProvenance prov;
    prov.face = flat_to_ints(r.get(prefix + "prov_face"));
    prov.bary_u = r.get(prefix + "prov_u");
    prov.bary_v = r.get(prefix + "prov_v");
    rec.provenance = std::move(prov);
  }
  if (r.has(prefix + "mesh_vertices")) {
    TriangleMesh mesh;
    mesh.vertices = flat_to_vec3s(r.get(prefix + "mesh_vertices"));
    std::vector<int> fi = flat_to_ints(r.get(prefix + "mesh_faces"));
    for (std::size_t i = 0; i + 2 < fi.size(); i += 3)
      mesh.faces.push_back({fi[i], fi[i + 1], fi[i + 2]});
    rec.source_mesh = std::move(mesh);
  }
  return rec;
}

}  // namespace

void save_checkpoint(const ModelState& state, const std::string& path, const AdamBundle* adam,
                     int epoch, int global_step, const std::string& config_echo) {
  std::filesystem::create_directories(path);

  BlobWriter w;
  w.add("hyper_s", flatten_hypernet(state.hyper_s),
        {static_cast<std::int64_t>(hypernet_param_count(state.hyper_s))});
  w.add("hyper_d", flatten_hypernet(state.hyper_d),
        {static_cast<std::int64_t>(hypernet_param_count(state.hyper_d))});

  std::vector<double> latents_flat;
  for (const auto& l : state.latents) latents_flat.insert(latents_flat.end(), l.begin(), l.end());
  w.add("latents", latents_flat,
        {static_cast<std::int64_t>(state.latents.size()), state.latent_dim()});

  json adam_json;
  if (adam) {
    w.add("adam_hyper_s_m", adam->hyper_s.m, {static_cast<std::int64_t>(adam->hyper_s.m.size())});
    w.add("adam_hyper_s_v", adam->hyper_s.v, {static_cast<std::int64_t>(adam->hyper_s.v.size())});
    w.add("adam_hyper_d_m", adam->hyper_d.m, {static_cast<std::int64_t>(adam->hyper_d.m.size())});
    w.add("adam_hyper_d_v", adam->hyper_d.v, {static_cast<std::int64_t>(adam->hyper_d.v.size())});
    std::vector<double> lm, lv;
    std::vector<std::int64_t> lt;
    for (const auto& a : adam->latents) {
      lm.insert(lm.end(), a.m.begin(), a.m.end());
      lv.insert(lv.end(), a.v.begin(), a.v.end());
      lt.push_back(a.t);
    }
    w.add("adam_latents_m", lm,
          {static_cast<std::int64_t>(adam->latents.size()), state.latent_dim()});
    w.add("adam_latents_v", lv,
          {static_cast<std::int64_t>(adam->latents.size()), state.latent_dim()});
    adam_json = {{"t_hyper_s", adam->hyper_s.t}, {"t_hyper_d", adam->hyper_d.t}, {"t_latents", lt}};
  }

  add_record_arrays(w, "template_", state.template_record);

  json manifest = {
      {"format_version", kFormatVersion},
      {"hyper_s", hypernet_to_json(state.hyper_s)},
      {"hyper_d", hypernet_to_json(state.hyper_d)},
      {"shape_ids", state.shape_ids},
      {"template",
       {{"id", state.template_record.id},
        {"sdf_reliable", state.template_record.sdf_reliable},
        {"zeta", state.template_record.volume.zeta}}},
      {"epoch", epoch},
      {"global_step", global_step},
      {"arrays", w.manifest_arrays},
      {"config", json::parse(config_echo.empty() ? "{}" : config_echo)},
  };
  if (!adam_json.is_null()) manifest["adam"] = adam_json;
  // Timestamp is provenance only; every other field is deterministic.
  manifest["written_at_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();

  {
    std::ofstream blob(path + "/blob.bin", std::ios::binary);
    if (!blob) throw IoError("cannot write checkpoint blob: " + path);
    blob.write(reinterpret_cast<const char*>(w.data.data()),
               static_cast<std::streamsize>(w.data.size() * sizeof(double)));
    if (!blob) throw IoError("failed writing checkpoint blob: " + path);
  }
  {
    std::ofstream mf(path + "/manifest.json");
    if (!mf) throw IoError("cannot write checkpoint manifest: " + path);
    mf << manifest.dump(2) << "\n";
    if (!mf) throw IoError("failed writing checkpoint manifest: " + path);
  }
}

void save_checkpoint(TrainSession& session, int epoch, const std::string& path,
                     const std::string& config_echo) {
  AdamBundle bundle;
  bundle.hyper_s = session.adam_hyper_s();
  bundle.hyper_d = session.adam_hyper_d();
  bundle.latents = session.adam_latents();
  save_checkpoint(session.state(), path, &bundle, epoch, session.global_step, config_echo);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream mf(path + "/manifest.json");
  if (!mf) throw IoError("cannot open checkpoint manifest: " + path);
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.at("format_version").get<int>() != kFormatVersion)
    throw ValidationError("unsupported checkpoint format version");

  CheckpointData data;
  try {
    data.state.hyper_s = hypernet_from_json(manifest.at("hyper_s"));
    data.state.hyper_d = hypernet_from_json(manifest.at("hyper_d"));
    data.state.shape_ids = manifest.at("shape_ids").get<std::vector<std::string>>();
    data.epoch = manifest.at("epoch").get<int>();
    data.global_step = manifest.at("global_step").get<int>();
    data.config_echo = manifest.at("config").dump();

    BlobReader reader(manifest, path + "/blob.bin");
    Vector hs = reader.get("hyper_s");
    if (static_cast<int>(hs.size()) != hypernet_param_count(data.state.hyper_s))
      throw ValidationError("checkpoint hyper_s array does not match its spec");
    unflatten_hypernet(hs, data.state.hyper_s);
    Vector hd = reader.get("hyper_d");
    if (static_cast<int>(hd.size()) != hypernet_param_count(data.state.hyper_d))
      throw ValidationError("checkpoint hyper_d array does not match its spec");
    unflatten_hypernet(hd, data.state.hyper_d);

    const int d = data.state.hyper_s.latent_dim;
    Vector lat = reader.get("latents");
    if (lat.size() != data.state.shape_ids.size() * static_cast<std::size_t>(d))
      throw ValidationError("checkpoint latent table does not match shape ids");
    for (std::size_t i = 0; i < data.state.shape_ids.size(); ++i)
      data.state.latents.emplace_back(lat.begin() + i * d, lat.begin() + (i + 1) * d);

    data.state.template_record = read_record_arrays(reader, "template_", manifest.at("template"));

    if (manifest.contains("adam")) {
      data.adam.hyper_s.m = reader.get("adam_hyper_s_m");
      data.adam.hyper_s.v = reader.get("adam_hyper_s_v");
      data.adam.hyper_s.t = manifest["adam"].at("t_hyper_s").get<std::int64_t>();
      data.adam.hyper_d.m = reader.get("adam_hyper_d_m");
      data.adam.hyper_d.v = reader.get("adam_hyper_d_v");
      data.adam.hyper_d.t = manifest["adam"].at("t_hyper_d").get<std::int64_t>();
      Vector lm = reader.get("adam_latents_m");
      Vector lv = reader.get("adam_latents_v");
      auto lt = manifest["adam"].at("t_latents").get<std::vector<std::int64_t>>();
      for (std::size_t i = 0; i < data.state.shape_ids.size(); ++i) {
        AdamState a(d);
        std::copy(lm.begin() + i * d, lm.begin() + (i + 1) * d, a.m.begin());
        std::copy(lv.begin() + i * d, lv.begin() + (i + 1) * d, a.v.begin());
        a.t = lt.at(i);
        data.adam.latents.push_back(std::move(a));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint manifest is missing fields: " + std::string(e.what()));
  }
  return data;
}

}  // namespace tvc
