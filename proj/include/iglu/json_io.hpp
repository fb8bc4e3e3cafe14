#pragma once

#include <json.hpp>

#include "iglu/world.hpp"

namespace iglu {

// Grid shape: {"bounds":{"x":[-5,5],"y":[0,8],"z":[-5,5]},"blocks":[[x,y,z],...]}

nlohmann::json coordinate_to_json(const Coordinate& c);
Coordinate coordinate_from_json(const nlohmann::json& j);

nlohmann::json blocks_to_json(const BlockSet& blocks);
BlockSet blocks_from_json(const nlohmann::json& j);

nlohmann::json bounds_to_json(const GridBounds& b);
GridBounds bounds_from_json(const nlohmann::json& j);

nlohmann::json grid_to_json(const GridState& g);
/// Throws SchemaError on malformed input, OutOfBounds on stray blocks.
GridState grid_from_json(const nlohmann::json& j);

nlohmann::json diff_to_json(const GridDiff& d);
GridDiff diff_from_json(const nlohmann::json& j);

}  // namespace iglu
