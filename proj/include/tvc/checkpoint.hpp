#ifndef TVC_CHECKPOINT_HPP
#define TVC_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "tvc/adam.hpp"
#include "tvc/model.hpp"

namespace tvc {

class TrainSession;

struct AdamBundle {
  AdamState hyper_s, hyper_d;
  std::vector<AdamState> latents;
};

struct CheckpointData {
  ModelState state;
  AdamBundle adam;
  int epoch = 0;
  int global_step = 0;
  std::string config_echo;  // provenance: full run configuration as JSON text
};

// Checkpoint layout: <path>/manifest.json + <path>/blob.bin. Every array is
// stored as little-endian float64 at a manifest-declared offset, so the
// round-trip is bitwise exact.
void save_checkpoint(const ModelState& state, const std::string& path,
                     const AdamBundle* adam = nullptr, int epoch = 0, int global_step = 0,
                     const std::string& config_echo = "{}");
void save_checkpoint(TrainSession& session, int epoch, const std::string& path,
                     const std::string& config_echo = "{}");

CheckpointData load_checkpoint(const std::string& path);

}  // namespace tvc

#endif
