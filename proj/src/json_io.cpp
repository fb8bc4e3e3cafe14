#include "iglu/json_io.hpp"

#include "iglu/error.hpp"

namespace iglu {

nlohmann::json coordinate_to_json(const Coordinate& c) { return nlohmann::json::array({c.x, c.y, c.z}); }

Coordinate coordinate_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number_integer() || !j[1].is_number_integer() ||
      !j[2].is_number_integer()) {
    throw Error(ErrorCode::SchemaError, "coordinate must be [x,y,z] integers, got " + j.dump());
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

nlohmann::json blocks_to_json(const BlockSet& blocks) {
  auto arr = nlohmann::json::array();
  for (const auto& c : blocks) arr.push_back(coordinate_to_json(c));
  return arr;
}

BlockSet blocks_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::SchemaError, "blocks must be an array");
  BlockSet out;
  for (const auto& c : j) out.insert(coordinate_from_json(c));
  return out;
}

nlohmann::json bounds_to_json(const GridBounds& b) {
  return {{"x", {b.x_min, b.x_max}}, {"y", {b.y_min, b.y_max}}, {"z", {b.z_min, b.z_max}}};
}

GridBounds bounds_from_json(const nlohmann::json& j) {
  auto axis = [&](const char* key) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_array() || j[key].size() != 2 ||
        !j[key][0].is_number_integer() || !j[key][1].is_number_integer()) {
      throw Error(ErrorCode::SchemaError, std::string("bounds.") + key + " must be [min,max]");
    }
    return std::pair{j[key][0].get<int>(), j[key][1].get<int>()};
  };
  GridBounds b;
  std::tie(b.x_min, b.x_max) = axis("x");
  std::tie(b.y_min, b.y_max) = axis("y");
  std::tie(b.z_min, b.z_max) = axis("z");
  b.validate();
  return b;
}

nlohmann::json grid_to_json(const GridState& g) {
  return {{"bounds", bounds_to_json(g.bounds())}, {"blocks", blocks_to_json(g.blocks())}};
}

GridState grid_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("blocks")) throw Error(ErrorCode::SchemaError, "grid needs bounds and blocks");
  const GridBounds bounds = j.contains("bounds") ? bounds_from_json(j["bounds"]) : GridBounds{};
  return GridState(bounds, blocks_from_json(j["blocks"]));
}

nlohmann::json diff_to_json(const GridDiff& d) {
  return {{"added", blocks_to_json(d.added)}, {"removed", blocks_to_json(d.removed)}};
}

GridDiff diff_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "diff must be an object");
  GridDiff d;
  if (j.contains("added")) d.added = blocks_from_json(j["added"]);
  if (j.contains("removed")) d.removed = blocks_from_json(j["removed"]);
  d.validate();
  return d;
}

}  // namespace iglu
