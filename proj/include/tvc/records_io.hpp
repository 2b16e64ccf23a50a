#ifndef TVC_RECORDS_IO_HPP
#define TVC_RECORDS_IO_HPP

#include <string>

#include "tvc/sampling.hpp"

namespace tvc {

// A record persists as a directory: manifest.json + arrays.bin (+ mesh.off).
void save_shape_record(const ShapeRecord& record, const std::string& dir,
                       const std::string& config_echo = "{}");
ShapeRecord load_shape_record(const std::string& dir);

}  // namespace tvc

#endif
