#include "tvc/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvc/checkpoint.hpp"
#include "tvc/config.hpp"
#include "tvc/errors.hpp"
#include "tvc/gradcheck.hpp"
#include "tvc/mesh_io.hpp"
#include "tvc/metrics.hpp"
#include "tvc/perturb.hpp"
#include "tvc/records_io.hpp"

namespace tvc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void refuse_overwrite(const std::string& path, bool force) {
  if (force) return;
  std::error_code ec;
  if (fs::exists(path, ec) && !(fs::is_directory(path, ec) && fs::is_empty(path, ec)))
    throw ValidationError("output path '" + path + "' exists; pass --force to overwrite");
}

RunConfig load_config(const std::string& config_path, const std::string& ablation_flag) {
  RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
  if (!ablation_flag.empty()) config.ablation = ablation_from_string(ablation_flag);
  config.resolve();
  return config;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// ---- preprocess ----------------------------------------------------------

int cmd_preprocess(const std::string& mesh_dir, const std::string& template_path,
                   const std::string& out_dir, const std::string& config_path,
                   const std::string& corr_dir, bool unreliable_sdf, bool force) {
  RunConfig config = load_config(config_path, "");
  refuse_overwrite(out_dir, force);
  fs::create_directories(out_dir);

  TriangleMesh template_mesh = normalize_to_unit_sphere(load_mesh(template_path));
  ShapeRecord template_record =
      build_shape_record(stem_of(template_path), template_mesh, nullptr, config.sampling,
                         mix_seed(config.seed, 0x70), nullptr);
  save_shape_record(template_record, out_dir + "/template", config.to_json_text());

  std::vector<std::string> mesh_files;
  for (const auto& entry : fs::directory_iterator(mesh_dir)) {
    std::string ext = entry.path().extension().string();
    if (ext == ".off" || ext == ".obj") mesh_files.push_back(entry.path().string());
  }
  if (mesh_files.empty()) throw ValidationError("no .off/.obj meshes found in " + mesh_dir);
  std::sort(mesh_files.begin(), mesh_files.end());

  json summary;
  summary["template"] = template_record.id;
  summary["shapes"] = json::array();
  for (std::size_t i = 0; i < mesh_files.size(); ++i) {
    const std::string id = stem_of(mesh_files[i]);
    TriangleMesh mesh = normalize_to_unit_sphere(load_mesh(mesh_files[i]));

    std::vector<int> corr;
    const std::vector<int>* corr_ptr = nullptr;
    if (!corr_dir.empty()) {
      std::string corr_path = corr_dir + "/" + id + ".corr";
      if (fs::exists(corr_path)) {
        corr = load_correspondence_file(corr_path);
        corr_ptr = &corr;
      }
    }
    ShapeRecord record = build_shape_record(id, mesh, &template_record, config.sampling,
                                            mix_seed(config.seed, 1000 + i), corr_ptr);
    record.sdf_reliable = !unreliable_sdf;
    save_shape_record(record, out_dir + "/shapes/" + id, config.to_json_text());

    double mean_abs = 0.0, frac_neg = 0.0;
    for (double s : record.volume.sdf) {
      mean_abs += std::abs(s);
      if (s < 0.0) frac_neg += 1.0;
    }
    mean_abs /= record.volume.sdf.size();
    frac_neg /= record.volume.sdf.size();
    summary["shapes"].push_back({{"id", id},
                                 {"surface_points", record.surface.points.size()},
                                 {"volume_points", record.volume.points.size()},
                                 {"mean_abs_sdf", mean_abs},
                                 {"frac_negative", frac_neg}});
  }
  summary["zeta"] = config.sampling.zeta;
  summary["config"] = json::parse(config.to_json_text());

  std::ofstream out(out_dir + "/summary.json");
  if (!out) throw IoError("cannot write summary: " + out_dir);
  out << summary.dump(2) << "\n";
  std::cout << "preprocessed " << mesh_files.size() << " shapes + template into " << out_dir
            << "\n";
  return 0;
}

// ---- train ----------------------------------------------------------------

std::vector<ShapeRecord> load_dataset(const std::string& data_dir, ShapeRecord* template_record) {
  *template_record = load_shape_record(data_dir + "/template");
  std::vector<std::string> shape_dirs;
  for (const auto& entry : fs::directory_iterator(data_dir + "/shapes"))
    if (entry.is_directory()) shape_dirs.push_back(entry.path().string());
  std::sort(shape_dirs.begin(), shape_dirs.end());
  if (shape_dirs.empty()) throw ValidationError("no shape records under " + data_dir);
  std::vector<ShapeRecord> dataset;
  dataset.reserve(shape_dirs.size());
  for (const auto& dir : shape_dirs) dataset.push_back(load_shape_record(dir));
  return dataset;
}

int cmd_train(const std::string& data_dir, const std::string& out_dir,
              const std::string& config_path, const std::string& ablation,
              const std::string& resume, bool force) {
  RunConfig config = load_config(config_path, ablation);
  refuse_overwrite(out_dir, force);

  ShapeRecord template_record;
  std::vector<ShapeRecord> dataset = load_dataset(data_dir, &template_record);
  std::vector<std::string> ids;
  for (const auto& r : dataset) ids.push_back(r.id);

  ModelState state;
  int start_epoch = 0;
  AdamBundle resume_adam;
  bool have_adam = false;
  int resume_step = 0;
  if (!resume.empty()) {
    CheckpointData data = load_checkpoint(resume);
    state = std::move(data.state);
    start_epoch = data.epoch;
    resume_step = data.global_step;
    if (!data.adam.hyper_s.m.empty()) {
      resume_adam = std::move(data.adam);
      have_adam = true;
    }
    if (state.shape_ids != ids)
      throw ValidationError("checkpoint shape ids do not match the dataset");
  } else {
    state = init_model(ids, template_record, config.nets, config.seed);
  }

  TrainSession session(state, dataset, config.train);
  session.start_epoch = start_epoch;
  session.global_step = resume_step;
  session.config_echo = config.to_json_text();
  if (have_adam) {
    session.adam_hyper_s() = std::move(resume_adam.hyper_s);
    session.adam_hyper_d() = std::move(resume_adam.hyper_d);
    session.adam_latents() = std::move(resume_adam.latents);
  }

  session.fit(out_dir);
  save_checkpoint(session, config.train.epochs, out_dir + "/final", config.to_json_text());
  write_history_csv(session.history(), out_dir + "/history.csv");
  std::cout << "trained " << config.train.epochs << " epochs over " << dataset.size()
            << " shapes; checkpoints in " << out_dir << "\n";
  return 0;
}

// ---- match ----------------------------------------------------------------

ShapeRecord load_shape_for_match(const std::string& path, const RunConfig& config,
                                 const ShapeRecord& template_record) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) return load_shape_record(path);
  std::string ext = fs::path(path).extension().string();
  if (ext == ".off" || ext == ".obj") {
    TriangleMesh mesh = normalize_to_unit_sphere(load_mesh(path));
    // Inference-only targets need no correspondence; sample fresh.
    ShapeRecord record;
    record.id = stem_of(path);
    record.source_mesh = mesh;
    record.surface = sample_surface(mesh, config.sampling.n_surface, mix_seed(config.seed, 0xA7));
    record.volume = build_volume_samples(mesh, config.sampling.n_volume,
                                         config.sampling.noise_stddevs, config.sampling.zeta,
                                         mix_seed(config.seed, 0xA8));
    return record;
  }
  if (ext == ".xyz") {
    PointCloud cloud = load_point_cloud_xyz(path);
    ShapeRecord record;
    record.id = stem_of(path);
    record.surface.points = cloud.points;
    // Point-cloud convention: every given point is on-surface with sdf 0; no
    // normals, and the sdr term stays off (sdf_reliable = false).
    record.volume.points = cloud.points;
    record.volume.sdf.assign(cloud.points.size(), 0.0);
    record.volume.zeta = config.sampling.zeta;
    record.sdf_reliable = false;
    return record;
  }
  (void)template_record;
  throw ValidationError("unsupported shape input: " + path +
                        " (expected a record directory, .off/.obj mesh, or .xyz cloud)");
}

int cmd_match(const std::string& ckpt, const std::string& source_path,
              const std::string& target_path, const std::string& out_path,
              const std::string& config_path, const std::string& ablation,
              const std::string& points_mode, bool unreliable_sdf, bool force) {
  RunConfig config = load_config(config_path, ablation);
  refuse_overwrite(out_path, force);

  CheckpointData data = load_checkpoint(ckpt);
  ModelState& state = data.state;

  ShapeRecord source = load_shape_for_match(source_path, config, state.template_record);
  ShapeRecord target = load_shape_for_match(target_path, config, state.template_record);
  if (unreliable_sdf) {
    source.sdf_reliable = false;
    target.sdf_reliable = false;
  }

  MatchResult fit_x, fit_y;
  LossWeights weights = config.infer_weights();
  fit_x = fit_latent(state, source, weights, config.loss, config.rbf, config.infer);
  fit_y = fit_latent(state, target, weights, config.loss, config.rbf, config.infer);

  std::vector<Vec3> source_points, target_points;
  if (points_mode == "vertices") {
    if (!source.source_mesh || !target.source_mesh)
      throw ValidationError("--points vertices needs mesh-backed shapes");
    source_points = source.source_mesh->vertices;
    target_points = target.source_mesh->vertices;
  } else {
    source_points = source.surface.points;
    target_points = target.surface.points;
  }

  DenseMap map =
      correspond_points(state, fit_x.alpha, fit_y.alpha, source_points, target_points);
  map.source_id = source.id;
  map.target_id = target.id;
  save_dense_map(map, out_path);

  double residual_mean = 0.0, residual_max = 0.0;
  for (double d : map.distances) {
    residual_mean += d;
    residual_max = std::max(residual_max, d);
  }
  if (!map.distances.empty()) residual_mean /= map.distances.size();

  json sidecar = {
      {"source_id", map.source_id},
      {"target_id", map.target_id},
      {"points", points_mode},
      {"source_stages",
       {{"map_initial", fit_x.map_initial},
        {"map_final", fit_x.map_final},
        {"chamfer_initial", fit_x.chamfer_initial},
        {"chamfer_final", fit_x.chamfer_final}}},
      {"target_stages",
       {{"map_initial", fit_y.map_initial},
        {"map_final", fit_y.map_final},
        {"chamfer_initial", fit_y.chamfer_initial},
        {"chamfer_final", fit_y.chamfer_final}}},
      {"residual_mean", residual_mean},
      {"residual_max", residual_max},
      {"config", json::parse(config.to_json_text())},
  };
  std::ofstream side(out_path + ".json");
  if (!side) throw IoError("cannot write sidecar: " + out_path + ".json");
  side << sidecar.dump(2) << "\n";
  std::cout << "matched " << map.source_id << " -> " << map.target_id << " (" <<
      map.assignment.size() << " points) into " << out_path << "\n";
  return 0;
}

// ---- eval -----------------------------------------------------------------

std::vector<int> load_index_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open index file: " + path);
  std::vector<int> out;
  int idx;
  while (in >> idx) out.push_back(idx);
  if (out.empty()) throw ValidationError("index file is empty: " + path);
  return out;
}

int cmd_eval(const std::string& map_path, const std::string& gt_path, const std::string& mesh_path,
             const std::string& protocol, const std::string& out_path,
             const std::string& source_mesh_path, const std::string& source_cloud_path,
             const std::string& target_cloud_path, const std::string& source_kp_path,
             const std::string& target_kp_path, int k, const std::string& config_path,
             bool force) {
  RunConfig config = load_config(config_path, "");
  refuse_overwrite(out_path, force);
  MetricReport report;
  if (protocol == "geodesic") {
    GroundTruth gt{load_index_file(gt_path)};
    report = geodesic_error(load_index_file(map_path), gt, load_mesh(mesh_path));
  } else if (protocol == "pc") {
    if (source_mesh_path.empty() || source_cloud_path.empty() || target_cloud_path.empty())
      throw ValidationError(
          "protocol pc needs --source-mesh, --source-cloud and --target-cloud");
    DenseMap map = load_dense_map(map_path);
    GroundTruth gt{load_index_file(gt_path)};
    report = pc_error(map, gt, load_mesh(source_mesh_path), load_mesh(mesh_path),
                      load_point_cloud_xyz(source_cloud_path),
                      load_point_cloud_xyz(target_cloud_path));
  } else if (protocol == "keypoint") {
    if (source_kp_path.empty() || target_kp_path.empty() || source_cloud_path.empty() ||
        target_cloud_path.empty())
      throw ValidationError(
          "protocol keypoint needs --source-keypoints, --target-keypoints, --source-cloud and "
          "--target-cloud");
    DenseMap map = load_dense_map(map_path);
    report = keypoint_error(map, load_keypoints(source_kp_path), load_keypoints(target_kp_path),
                            load_point_cloud_xyz(source_cloud_path),
                            load_point_cloud_xyz(target_cloud_path), k);
  } else {
    throw ValidationError("unknown protocol '" + protocol + "'");
  }
  write_report_json(report, out_path, out_path + ".curve.csv", out_path + ".perpoint.txt");
  {
    std::ifstream in(out_path);
    json j = json::parse(in);
    j["config"] = json::parse(config.to_json_text());
    in.close();
    std::ofstream out(out_path);
    out << j.dump(2) << "\n";
  }
  std::cout << "mean error: " << report.mean << " over " << report.per_point.size()
            << " points; report in " << out_path << "\n";
  return 0;
}

// ---- perturb ---------------------------------------------------------------

int cmd_perturb(const std::string& in_path, const std::string& out_path,
                const std::string& kept_path, const std::string& scenario_name, double noise_std,
                double fraction, double outlier_std, const std::string& region_name, int axis,
                double offset, std::vector<double> center, double radius, std::uint64_t seed,
                bool force) {
  refuse_overwrite(out_path, force);
  PerturbScenario scenario;
  if (scenario_name == "noise")
    scenario.kind = PerturbScenario::Kind::Noise;
  else if (scenario_name == "outliers")
    scenario.kind = PerturbScenario::Kind::Outliers;
  else if (scenario_name == "clutter")
    scenario.kind = PerturbScenario::Kind::Clutter;
  else if (scenario_name == "partial")
    scenario.kind = PerturbScenario::Kind::Partial;
  else
    throw ValidationError("unknown scenario '" + scenario_name + "'");
  scenario.noise_std = noise_std;
  scenario.fraction = fraction;
  scenario.outlier_std = outlier_std;
  scenario.region = region_name == "sphere" ? PerturbScenario::Region::Sphere
                                            : PerturbScenario::Region::HalfSpace;
  scenario.axis = axis;
  scenario.offset = offset;
  if (center.size() == 3) scenario.center = {center[0], center[1], center[2]};
  scenario.radius = radius;

  std::string ext = fs::path(in_path).extension().string();
  if (ext == ".xyz") {
    PerturbedCloud result = perturb_cloud(load_point_cloud_xyz(in_path), scenario, seed);
    save_point_cloud_xyz(result.cloud, out_path);
    if (!kept_path.empty()) save_kept_indices(result.source_index, kept_path);
    std::cout << "perturbed cloud: " << result.cloud.points.size() << " points\n";
  } else {
    PerturbedMesh result = perturb_mesh(load_mesh(in_path), scenario, seed);
    save_mesh(result.mesh, out_path);
    if (!kept_path.empty()) save_kept_indices(result.source_index, kept_path);
    std::cout << "perturbed mesh: " << result.mesh.vertex_count() << " vertices, "
              << result.mesh.face_count() << " faces\n";
  }
  return 0;
}

// ---- gradcheck --------------------------------------------------------------

int cmd_gradcheck(int seeds, double tolerance, std::uint64_t seed) {
  GradCheckOptions options;
  options.seeds = seeds;
  options.tolerance = tolerance;
  options.base_seed = seed;
  GradCheckReport report = run_gradcheck(options);
  for (const auto& term : report.terms)
    std::cout << (term.pass ? "PASS" : "FAIL") << "  " << term.term << "  seed=" << term.seed
              << "  worst_rel_err=" << term.worst_rel_err << " at " << term.worst_param << " ("
              << term.checked << " entries)\n";
  if (!report.pass) {
    std::cout << "gradcheck FAILED\n";
    return 2;
  }
  std::cout << "gradcheck passed\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"template-volume non-rigid shape correspondence"};
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "build shape records from a mesh directory");
  std::string mesh_dir, template_path, out_dir, config_path, corr_dir;
  bool force = false;
  pre->add_option("--mesh-dir", mesh_dir, "directory of .off/.obj meshes")->required();
  pre->add_option("--template", template_path, "template mesh file")->required();
  pre->add_option("--out", out_dir, "output record directory")->required();
  pre->add_option("--config", config_path, "config JSON");
  pre->add_option("--corr-dir", corr_dir, "directory of <id>.corr correspondence files");
  bool unreliable_sdf = false;
  pre->add_flag("--unreliable-sdf", unreliable_sdf,
                "flag shape records as having untrustworthy signed distances");
  pre->add_flag("--force", force, "overwrite existing outputs");

  // train
  auto* tr = app.add_subcommand("train", "train the model on preprocessed records");
  std::string data_dir, ckpt_out, ablation, resume;
  tr->add_option("--data", data_dir, "record directory from preprocess")->required();
  tr->add_option("--out", ckpt_out, "checkpoint output directory")->required();
  tr->add_option("--config", config_path, "config JSON");
  tr->add_option("--ablation", ablation, "ablation preset name");
  tr->add_option("--resume", resume, "checkpoint directory to resume from");
  tr->add_flag("--force", force, "overwrite existing outputs");

  // match
  auto* ma = app.add_subcommand("match", "correspond two shapes through the template");
  std::string ckpt, source_path, target_path, map_out, points_mode = "samples";
  ma->add_option("--ckpt", ckpt, "trained checkpoint directory")->required();
  ma->add_option("--source", source_path, "source record dir / mesh / cloud")->required();
  ma->add_option("--target", target_path, "target record dir / mesh / cloud")->required();
  ma->add_option("--out", map_out, "output map file")->required();
  ma->add_option("--config", config_path, "config JSON");
  ma->add_option("--ablation", ablation, "ablation preset name");
  ma->add_option("--points", points_mode, "samples|vertices")
      ->check(CLI::IsMember({"samples", "vertices"}));
  ma->add_flag("--unreliable-sdf", unreliable_sdf,
               "treat both shapes' signed distances as untrustworthy (drops the sdr term)");
  ma->add_flag("--force", force, "overwrite existing outputs");

  // eval
  auto* ev = app.add_subcommand("eval", "score a map against ground truth");
  std::string map_path, gt_path, mesh_path, protocol = "geodesic", report_out;
  std::string source_mesh_path, source_cloud_path, target_cloud_path, source_kp, target_kp;
  int k = 32;
  ev->add_option("--map", map_path, "predicted map file")->required();
  ev->add_option("--gt", gt_path, "ground-truth index file");
  ev->add_option("--mesh", mesh_path, "evaluation (target) mesh");
  ev->add_option("--protocol", protocol, "geodesic|pc|keypoint")
      ->check(CLI::IsMember({"geodesic", "pc", "keypoint"}));
  ev->add_option("--out", report_out, "report output path")->required();
  ev->add_option("--source-mesh", source_mesh_path, "source mesh (pc protocol)");
  ev->add_option("--source-cloud", source_cloud_path, "source cloud (pc/keypoint)");
  ev->add_option("--target-cloud", target_cloud_path, "target cloud (pc/keypoint)");
  ev->add_option("--source-keypoints", source_kp, "source keypoint file");
  ev->add_option("--target-keypoints", target_kp, "target keypoint file");
  ev->add_option("--k", k, "keypoint neighborhood size");
  ev->add_option("--config", config_path, "config JSON");
  ev->add_flag("--force", force, "overwrite existing outputs");

  // perturb
  auto* pe = app.add_subcommand("perturb", "apply a corruption scenario");
  std::string perturb_in, perturb_out, kept_out, scenario_name = "noise",
                                                 region_name = "halfspace";
  double noise_std = 0.0, fraction = 0.0, outlier_std = 0.1, offset = 0.0, radius = 0.5;
  int axis = 0;
  std::vector<double> center;
  std::uint64_t perturb_seed = 1;
  pe->add_option("--in", perturb_in, "input .xyz cloud or mesh")->required();
  pe->add_option("--out", perturb_out, "output path")->required();
  pe->add_option("--kept", kept_out, "kept-index output file");
  pe->add_option("--scenario", scenario_name, "noise|outliers|clutter|partial")->required();
  pe->add_option("--std", noise_std, "noise stddev");
  pe->add_option("--fraction", fraction, "outlier/clutter fraction");
  pe->add_option("--outlier-std", outlier_std, "outlier displacement stddev");
  pe->add_option("--region", region_name, "halfspace|sphere");
  pe->add_option("--axis", axis, "half-space axis (0/1/2)");
  pe->add_option("--offset", offset, "half-space offset");
  pe->add_option("--center", center, "sphere center (three values)")->expected(3);
  pe->add_option("--radius", radius, "sphere radius");
  pe->add_option("--seed", perturb_seed, "rng seed");
  pe->add_flag("--force", force, "overwrite existing outputs");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  int gc_seeds = 3;
  double gc_tol = 1e-4;
  std::uint64_t gc_seed = 7;
  gc->add_option("--seeds", gc_seeds, "number of random seeds");
  gc->add_option("--tolerance", gc_tol, "relative error bound");
  gc->add_option("--seed", gc_seed, "base seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (pre->parsed())
      return cmd_preprocess(mesh_dir, template_path, out_dir, config_path, corr_dir,
                            unreliable_sdf, force);
    if (tr->parsed()) return cmd_train(data_dir, ckpt_out, config_path, ablation, resume, force);
    if (ma->parsed())
      return cmd_match(ckpt, source_path, target_path, map_out, config_path, ablation,
                       points_mode, unreliable_sdf, force);
    if (ev->parsed())
      return cmd_eval(map_path, gt_path, mesh_path, protocol, report_out, source_mesh_path,
                      source_cloud_path, target_cloud_path, source_kp, target_kp, k, config_path,
                      force);
    if (pe->parsed())
      return cmd_perturb(perturb_in, perturb_out, kept_out, scenario_name, noise_std, fraction,
                         outlier_std, region_name, axis, offset, center, radius, perturb_seed,
                         force);
    if (gc->parsed()) return cmd_gradcheck(gc_seeds, gc_tol, gc_seed);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace tvc
