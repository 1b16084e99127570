#pragma once

// JSON (de)serialisation of models. The on-disk format is a single object
//   {"C": [[...], ...], "D": [[...], ...]}
// with dense row-major rate matrices. Parsing always runs full model
// validation, so a loaded model carries the same guarantees as one built
// in code. Doubles are written shortest-round-trip, so save/load is exact.

#include <string>

#include "mapkit/model.hpp"

namespace mapkit {

MapModel parse_model_json(const std::string& text,
                          const Tolerances& tol = default_tolerances());
MapModel load_model_file(const std::string& path,
                         const Tolerances& tol = default_tolerances());
std::string model_to_json(const MapModel& m);

}  // namespace mapkit
