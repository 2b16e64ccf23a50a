#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "support/synthetic.hpp"
#include "tvc/cli.hpp"
#include "tvc/config.hpp"
#include "tvc/errors.hpp"
#include "tvc/mesh_io.hpp"
#include "tvc/records_io.hpp"

using namespace tvc;
using namespace tvc::testsupport;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  std::string str(const std::string& sub = "") const {
    return sub.empty() ? path.string() : (path / sub).string();
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// A fast config for CLI round trips.
void write_small_config(const std::string& path, int epochs = 1) {
  std::ofstream out(path);
  out << R"({
  "seed": 3,
  "sampling": {"n_volume": 400, "n_surface": 160},
  "nets": {"hidden_dim": 16, "hidden_layers": 2, "latent_dim": 8, "dropout": 0.0,
           "hyper_hidden_dim": 16, "hyper_hidden_layers": 1},
  "loss": {"n_surface": 32, "n_sdr": 32},
  "train": {"epochs": )"
      << epochs << R"(, "batch_shapes": 2, "learning_rate": 0.001},
  "infer": {"map_steps": 4, "chamfer_steps": 4}
})";
}

void write_mesh_dir(const TempDir& dir, int count) {
  TriangleMesh base = icosphere(1, 0.9);
  save_mesh(base, dir.str("template.off"));
  for (int i = 0; i < count; ++i)
    save_mesh(normalize_to_unit_sphere(smooth_deform(base, 100 + i, 0.12)),
              dir.str("shape" + std::to_string(i) + ".off"));
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"seeed": 1})"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"train": {"epoch": 3}})"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"loss": {"eta": -1.0}})"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"ablation": "wo_everything"})"), ValidationError);
  RunConfig ok = RunConfig::from_json_text(R"({"seed": 9, "loss": {"eta": 0.2}})");
  CHECK(ok.seed == 9);
  CHECK(ok.loss.eta == 0.2);
}

TEST_CASE("config echo documents every default and round-trips") {
  RunConfig config;
  config.resolve();
  std::string text = config.to_json_text();
  RunConfig back = RunConfig::from_json_text(text);
  CHECK(back.to_json_text() == text);
  // Published defaults survive the round trip.
  CHECK(back.weights.lambda2 == 500.0);
  CHECK(back.train.learning_rate == 1e-4);
  CHECK(back.train.epochs == 30);
  CHECK(back.loss.eta == 0.1);
}

TEST_CASE("ablation presets plumb into masks") {
  RunConfig config;
  config.ablation = AblationPreset::WoSdfNet;
  config.resolve();
  CHECK_FALSE(config.train_weights().mask.use_sdf);
  CHECK_FALSE(config.infer_weights().mask.use_sdf);
  CHECK(config.train_weights().mask.use_surf);

  config.ablation = AblationPreset::TeWoSdr;
  config.resolve();
  CHECK(config.train_weights().mask.use_sdr);
  CHECK_FALSE(config.infer_weights().mask.use_sdr);

  config.ablation = AblationPreset::WoOpt;
  config.resolve();
  CHECK_FALSE(config.infer.use_chamfer_refine);
}

TEST_CASE("preprocess builds one record per mesh plus the template") {
  TempDir meshes("tvc_app_meshes");
  TempDir out("tvc_app_records");
  write_mesh_dir(meshes, 3);
  std::string config_path = meshes.str("config.json");
  write_small_config(config_path);

  int code = run_cli({"preprocess", "--mesh-dir", meshes.str(), "--template",
                      meshes.str("template.off"), "--out", out.str(), "--config", config_path,
                      "--force"});
  CHECK(code == 0);
  CHECK(fs::exists(out.str("template/manifest.json")));
  int shape_count = 0;
  for (const auto& e : fs::directory_iterator(out.str("shapes")))
    if (e.is_directory()) ++shape_count;
  // The template mesh sits in the mesh dir too, so it is also a shape record.
  CHECK(shape_count == 4);
  CHECK(fs::exists(out.str("summary.json")));

  ShapeRecord record = load_shape_record(out.str("shapes/shape0"));
  CHECK(record.surface.points.size() == 160);
  CHECK(record.volume.points.size() == 400);
}

TEST_CASE("preprocess reruns are byte-identical and refuse silent overwrite") {
  TempDir meshes("tvc_app_meshes2");
  TempDir out_a("tvc_app_records_a");
  TempDir out_b("tvc_app_records_b");
  write_mesh_dir(meshes, 2);
  std::string config_path = meshes.str("config.json");
  write_small_config(config_path);

  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"preprocess", "--mesh-dir", meshes.str(), "--template",
                                    meshes.str("template.off"), "--out", out, "--config",
                                    config_path, "--force"};
  };
  CHECK(run_cli(args(out_a.str())) == 0);
  CHECK(run_cli(args(out_b.str())) == 0);
  CHECK(read_file(out_a.str("shapes/shape0/arrays.bin")) ==
        read_file(out_b.str("shapes/shape0/arrays.bin")));
  CHECK(read_file(out_a.str("template/arrays.bin")) == read_file(out_b.str("template/arrays.bin")));

  // Existing non-empty output without --force is refused.
  auto no_force = args(out_a.str());
  no_force.pop_back();
  CHECK(run_cli(no_force) == 1);
}

TEST_CASE("preprocess without a template is a usage error") {
  TempDir meshes("tvc_app_meshes3");
  write_mesh_dir(meshes, 1);
  CHECK(run_cli({"preprocess", "--mesh-dir", meshes.str(), "--out", meshes.str("out")}) == 1);
}

TEST_CASE("train, match and eval round-trip through the CLI") {
  TempDir meshes("tvc_app_e2e");
  TempDir records("tvc_app_e2e_records");
  TempDir ckpt("tvc_app_e2e_ckpt");
  write_mesh_dir(meshes, 3);
  std::string config_path = meshes.str("config.json");
  write_small_config(config_path, 1);

  REQUIRE(run_cli({"preprocess", "--mesh-dir", meshes.str(), "--template",
                   meshes.str("template.off"), "--out", records.str(), "--config", config_path,
                   "--force"}) == 0);
  REQUIRE(run_cli({"train", "--data", records.str(), "--out", ckpt.str(), "--config",
                   config_path, "--force"}) == 0);
  CHECK(fs::exists(ckpt.str("epoch_1/manifest.json")));  // one checkpoint per epoch
  CHECK(fs::exists(ckpt.str("final/manifest.json")));
  CHECK(fs::exists(ckpt.str("history.csv")));

  // History rows = epochs x ceil(shapes / batch).
  std::ifstream history(ckpt.str("history.csv"));
  int lines = 0;
  std::string line;
  while (std::getline(history, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 1 + 2);  // header + 4 shapes / batch 2

  std::string map_path = ckpt.str("self.map");
  REQUIRE(run_cli({"match", "--ckpt", ckpt.str("final"), "--source",
                   records.str("shapes/shape0"), "--target", records.str("shapes/shape0"),
                   "--out", map_path, "--config", config_path, "--force"}) == 0);
  CHECK(fs::exists(map_path));
  CHECK(fs::exists(map_path + ".json"));

  // Stage objectives in the sidecar obey the best-iterate contract.
  std::string sidecar = read_file(map_path + ".json");
  CHECK(sidecar.find("map_initial") != std::string::npos);
  {
    auto j = nlohmann::json::parse(sidecar);
    CHECK(j["source_stages"]["map_final"].get<double>() <=
          j["source_stages"]["map_initial"].get<double>());
    CHECK(j["source_stages"]["chamfer_final"].get<double>() <=
          j["source_stages"]["chamfer_initial"].get<double>());
  }

  // Evaluate an identity map against an identity ground truth: mean 0.
  TriangleMesh mesh = load_mesh(records.str("shapes/shape0/mesh.off"));
  std::string gt_path = ckpt.str("gt.txt");
  {
    std::ofstream gt(gt_path);
    for (int i = 0; i < mesh.vertex_count(); ++i) gt << i << "\n";
  }
  std::string report_path = ckpt.str("report.json");
  REQUIRE(run_cli({"eval", "--map", gt_path, "--gt", gt_path, "--mesh",
                   records.str("shapes/shape0/mesh.off"), "--protocol", "geodesic", "--out",
                   report_path, "--force"}) == 0);
  auto report = nlohmann::json::parse(read_file(report_path));
  CHECK(report["mean"].get<double>() == 0.0);
  CHECK(fs::exists(report_path + ".curve.csv"));

  // Report mean equals the average of the per-point file.
  std::ifstream pp(report_path + ".perpoint.txt");
  double v, sum = 0.0;
  int n = 0;
  while (pp >> v) {
    sum += v;
    ++n;
  }
  CHECK(n == mesh.vertex_count());
  CHECK(report["mean"].get<double>() == doctest::Approx(sum / n));
}

TEST_CASE("train with an ablation flag is a pure config change") {
  TempDir meshes("tvc_app_abl");
  TempDir records("tvc_app_abl_records");
  TempDir ckpt("tvc_app_abl_ckpt");
  write_mesh_dir(meshes, 2);
  std::string config_path = meshes.str("config.json");
  write_small_config(config_path, 1);

  REQUIRE(run_cli({"preprocess", "--mesh-dir", meshes.str(), "--template",
                   meshes.str("template.off"), "--out", records.str(), "--config", config_path,
                   "--force"}) == 0);
  CHECK(run_cli({"train", "--data", records.str(), "--out", ckpt.str(), "--config", config_path,
                 "--ablation", "wo_sdfnet", "--force"}) == 0);

  // The disabled term reports zero in the history.
  std::ifstream history(ckpt.str("history.csv"));
  std::string header, row;
  std::getline(history, header);
  std::getline(history, row);
  auto first_field = [](const std::string& s, int field) {
    std::size_t pos = 0;
    for (int i = 0; i < field; ++i) pos = s.find(',', pos) + 1;
    return std::stod(s.substr(pos));
  };
  CHECK(first_field(row, 2) == 0.0);  // sdf column
  CHECK(first_field(row, 3) > 0.0);   // surf column
}

TEST_CASE("match with a missing target exits with an i/o error") {
  TempDir dir("tvc_app_missing");
  CHECK(run_cli({"match", "--ckpt", dir.str("nope"), "--source", dir.str("a.off"), "--target",
                 dir.str("b.off"), "--out", dir.str("m.txt")}) == 3);
}

TEST_CASE("perturb CLI with zero noise is byte-identical geometry") {
  TempDir dir("tvc_app_perturb");
  PointCloud cloud;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) cloud.points.push_back(rng.normal_vec3());
  save_point_cloud_xyz(cloud, dir.str("in.xyz"));

  CHECK(run_cli({"perturb", "--in", dir.str("in.xyz"), "--out", dir.str("out.xyz"), "--kept",
                 dir.str("kept.txt"), "--scenario", "noise", "--std", "0", "--force"}) == 0);
  CHECK(read_file(dir.str("in.xyz")) == read_file(dir.str("out.xyz")));
}

TEST_CASE("perturb CLI validates fractions") {
  TempDir dir("tvc_app_perturb2");
  PointCloud cloud;
  cloud.points = {{0, 0, 0}};
  save_point_cloud_xyz(cloud, dir.str("in.xyz"));
  CHECK(run_cli({"perturb", "--in", dir.str("in.xyz"), "--out", dir.str("out.xyz"),
                 "--scenario", "clutter", "--fraction", "2.0", "--force"}) == 1);
}

TEST_CASE("gradcheck subcommand passes on the default seed") {
  CHECK(run_cli({"gradcheck", "--seeds", "1"}) == 0);
}
