// Tuning bench for the end-to-end desk experiment; not part of ctest.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "support/experiment.hpp"

using namespace tvc;
using namespace tvc::testsupport;

int main(int argc, char** argv) {
  DeskExperimentConfig config;
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string key = argv[i];
    double value = std::atof(argv[i + 1]);
    if (key == "--epochs") config.train.epochs = static_cast<int>(value);
    else if (key == "--shapes") config.train_shapes = static_cast<int>(value);
    else if (key == "--bend") config.bend_amplitude = value;
    else if (key == "--waves") config.wave_count = static_cast<int>(value);
    else if (key == "--freq-lo") config.freq_lo = value;
    else if (key == "--freq-hi") config.freq_hi = value;
    else if (key == "--epochs2") config.train.epochs = static_cast<int>(value);
    else if (key == "--subdiv") config.subdivisions = static_cast<int>(value);
    else if (key == "--nvol") config.sampling.n_volume = static_cast<int>(value);
    else if (key == "--nsurf") config.sampling.n_surface = static_cast<int>(value);
    else if (key == "--map-steps") config.infer.map_steps = static_cast<int>(value);
    else if (key == "--chamfer-steps") config.infer.chamfer_steps = static_cast<int>(value);
    else if (key == "--step-surf") config.train.loss.n_surface = static_cast<int>(value);
    else if (key == "--step-sdr") config.train.loss.n_sdr = static_cast<int>(value);
    else if (key == "--lr") config.train.learning_rate = value;
    else if (key == "--infer-lr") config.infer.learning_rate = value;
    else if (key == "--seed") config.seed = static_cast<std::uint64_t>(value);
    else if (key == "--mean-init") config.infer.latent_init = LatentInit::MeanOfTrainingLatents;
    else { std::printf("unknown flag %s\n", key.c_str()); return 1; }
  }

  auto t0 = std::chrono::steady_clock::now();
  DeskWorld world = build_desk_world(config);
  auto t1 = std::chrono::steady_clock::now();
  std::printf("preprocess: %.1fs\n", std::chrono::duration<double>(t1 - t0).count());

  DeskExperimentResult result = run_desk_experiment(config, world, nullptr, true);
  auto t2 = std::chrono::steady_clock::now();
  std::printf("train+infer+eval: %.1fs\n", std::chrono::duration<double>(t2 - t1).count());
  std::printf("mean geodesic error: %.4f\n", result.mean_error);
  std::printf("random baseline:     %.4f (ratio %.2fx)\n", result.random_baseline,
              result.random_baseline / result.mean_error);
  return 0;
}
