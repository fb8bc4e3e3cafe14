#include "iglu/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "iglu/error.hpp"
#include "iglu/json_io.hpp"
#include "iglu/regions.hpp"
#include "iglu/rng.hpp"

namespace iglu {

namespace fs = std::filesystem;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "valid" || s == "validation" || s == "val") return Split::Valid;
  if (s == "test") return Split::Test;
  throw Error(ErrorCode::InvalidArgument, "unknown split: " + std::string(s));
}

void Episode::validate() const {
  if (dialogue.empty()) throw Error(ErrorCode::SchemaError, "episode " + id + ": empty dialogue");
  try {
    apply_diff(grid_before, gold);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaError, "episode " + id + ": gold does not apply: " + e.what());
  }
}

CorpusManifest CorpusManifest::of(const std::vector<Episode>& episodes, std::string source,
                                  std::optional<std::uint64_t> seed) {
  CorpusManifest m;
  m.counts = {{Split::Train, 0}, {Split::Valid, 0}, {Split::Test, 0}};
  for (const auto& e : episodes) ++m.counts[e.split];
  m.source = std::move(source);
  m.seed = seed;
  return m;
}

nlohmann::json CorpusManifest::to_json() const {
  nlohmann::json j;
  j["source"] = source;
  j["counts"] = nlohmann::json::object();
  std::size_t total = 0;
  for (const auto& [s, n] : counts) {
    j["counts"][std::string(to_string(s))] = n;
    total += n;
  }
  j["total"] = total;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

// IGLU import -----------------------------------------------------------------

namespace {

BlockSet voxels_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::SchemaError, "voxel list must be an array");
  BlockSet out;
  for (const auto& v : j) {
    // Extra trailing entries (block colour) are ignored.
    if (!v.is_array() || v.size() < 3 || !v[0].is_number_integer() || !v[1].is_number_integer() ||
        !v[2].is_number_integer()) {
      throw Error(ErrorCode::SchemaError, "voxel must be [x, y, z, ...] with integer coordinates");
    }
    out.insert({v[0].get<int>(), v[1].get<int>(), v[2].get<int>()});
  }
  return out;
}

std::string dialogue_of(const nlohmann::json& step) {
  if (!step.contains("instruction") || !step.at("instruction").is_string()) {
    throw Error(ErrorCode::SchemaError, "missing string field 'instruction'");
  }
  std::string out;
  if (step.contains("context")) {
    const auto& ctx = step.at("context");
    if (!ctx.is_array()) throw Error(ErrorCode::SchemaError, "'context' must be an array of strings");
    for (const auto& line : ctx) {
      if (!line.is_string()) throw Error(ErrorCode::SchemaError, "'context' must be an array of strings");
      out += line.get<std::string>();
      out += '\n';
    }
  }
  out += step.at("instruction").get<std::string>();
  return out;
}

void import_file(const fs::path& file, Split default_split, const GridBounds& bounds, ImportResult& result,
                 std::size_t& record) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, file.string() + ": " + e.what());
  }
  const nlohmann::json* sessions = &doc;
  if (doc.is_object() && doc.contains("sessions")) sessions = &doc.at("sessions");
  if (!sessions->is_array()) {
    throw Error(ErrorCode::SchemaError, file.string() + ": expected an array of sessions or {\"sessions\": [...]}");
  }
  for (const auto& session : *sessions) {
    if (!session.is_object() || !session.contains("session_id") || !session.contains("steps") ||
        !session.at("steps").is_array()) {
      result.skipped.push_back({record++, "session without session_id/steps"});
      continue;
    }
    std::string sid = session.at("session_id").is_string() ? session.at("session_id").get<std::string>()
                                                           : session.at("session_id").dump();
    Split split = default_split;
    if (session.contains("split")) {
      try {
        split = split_from_string(session.at("split").get<std::string>());
      } catch (const std::exception& e) {
        result.skipped.push_back({record++, sid + ": bad split"});
        continue;
      }
    }
    const auto& steps = session.at("steps");
    for (std::size_t i = 0; i < steps.size(); ++i, ++record) {
      const auto& step = steps[i];
      try {
        if (!step.is_object()) throw Error(ErrorCode::SchemaError, "step is not an object");
        if (!step.contains("before") || !step.contains("after")) {
          throw Error(ErrorCode::SchemaError, "missing 'before' or 'after'");
        }
        Episode e;
        e.id = sid + "/" + std::to_string(i);
        e.dialogue = dialogue_of(step);
        e.grid_before = GridState(bounds, voxels_from_json(step.at("before")));
        GridState after(bounds, voxels_from_json(step.at("after")));
        e.gold = diff_between(e.grid_before, after);
        e.split = split;
        e.validate();
        result.episodes.push_back(std::move(e));
      } catch (const Error& err) {
        result.skipped.push_back({record, sid + "/" + std::to_string(i) + ": " + err.what()});
      } catch (const nlohmann::json::exception& err) {
        result.skipped.push_back({record, sid + "/" + std::to_string(i) + ": " + err.what()});
      }
    }
  }
}

}  // namespace

ImportResult import_iglu(const std::string& path, Split default_split, const GridBounds& bounds) {
  fs::path p(path);
  if (!fs::exists(p)) throw Error(ErrorCode::FileNotFound, "no such file or directory: " + path);
  std::vector<fs::path> files;
  if (fs::is_directory(p)) {
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(p);
  }
  ImportResult result;
  std::size_t record = 0;
  for (const auto& f : files) import_file(f, default_split, bounds, result, record);
  return result;
}

// Synthetic episodes ---------------------------------------------------------------

std::string_view to_string(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::Single: return "single";
    case ShapeKind::Row: return "row";
    case ShapeKind::Tower: return "tower";
    case ShapeKind::LShape: return "l_shape";
    case ShapeKind::Square: return "square";
  }
  return "single";
}

ShapeKind shape_from_string(std::string_view s) {
  for (auto shape : all_shapes()) {
    if (to_string(shape) == s) return shape;
  }
  if (s == "column") return ShapeKind::Tower;
  throw Error(ErrorCode::InvalidArgument, "unknown shape: " + std::string(s));
}

namespace {

const char* kNumberWords[] = {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight"};

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

struct Shape {
  std::vector<Coordinate> cells;  // relative to the anchor, all components >= 0
  std::string phrase;
};

Shape make_shape(ShapeKind kind, std::mt19937_64& rng) {
  Shape s;
  switch (kind) {
    case ShapeKind::Single:
      s.cells = {{0, 0, 0}};
      s.phrase = "a single block";
      break;
    case ShapeKind::Row: {
      int n = uniform(rng, 2, 5);
      bool along_x = uniform(rng, 0, 1) == 0;
      for (int i = 0; i < n; ++i) s.cells.push_back(along_x ? Coordinate{i, 0, 0} : Coordinate{0, 0, i});
      s.phrase = std::string("a row of ") + kNumberWords[n] + " blocks";
      break;
    }
    case ShapeKind::Tower: {
      int n = uniform(rng, 2, 5);
      for (int i = 0; i < n; ++i) s.cells.push_back({0, i, 0});
      s.phrase = std::string("a column ") + kNumberWords[n] + " tall";
      break;
    }
    case ShapeKind::LShape: {
      int a = uniform(rng, 2, 3);
      int b = uniform(rng, 2, 3);
      for (int i = 0; i < a; ++i) s.cells.push_back({i, 0, 0});
      for (int k = 1; k < b; ++k) s.cells.push_back({0, 0, k});
      s.phrase = std::string("an L shape of ") + kNumberWords[a + b - 1] + " blocks";
      break;
    }
    case ShapeKind::Square:
      s.cells = {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}, {1, 0, 1}};
      s.phrase = "a two by two square";
      break;
  }
  return s;
}

std::string location_phrase(const BlockSet& gold, const GridBounds& bounds) {
  RegionScheme scheme;
  // The location word describes the block nearest the shape's centroid.
  double cx = 0, cy = 0, cz = 0;
  for (const auto& c : gold) {
    cx += c.x;
    cy += c.y;
    cz += c.z;
  }
  double n = static_cast<double>(gold.size());
  cx /= n;
  cy /= n;
  cz /= n;
  const Coordinate* best = nullptr;
  double best_d = 0;
  for (const auto& c : gold) {
    double d = (c.x - cx) * (c.x - cx) + (c.y - cy) * (c.y - cy) + (c.z - cz) * (c.z - cz);
    if (!best || d < best_d) {
      best = &c;
      best_d = d;
    }
  }
  auto region = region_of(*best, scheme, bounds);
  if (region.index < 4) return "near the middle";
  return "toward the " + region_by_index(scheme, region.index - 4).name + " corner";
}

const char* kVerbs[] = {"build", "place", "make", "put down"};

}  // namespace

std::vector<Episode> generate_synthetic(std::uint64_t seed, std::size_t n, const std::vector<ShapeKind>& catalog,
                                        const GridBounds& bounds) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  if (catalog.empty()) throw Error(ErrorCode::InvalidArgument, "shape catalog is empty");
  bounds.validate();
  std::vector<Episode> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = "syn-" + std::to_string(seed) + "-" + std::to_string(i);
    std::mt19937_64 rng(derive_seed(seed, {"synthetic", std::to_string(i)}));
    auto kind = catalog[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(catalog.size()) - 1))];
    auto shape = make_shape(kind, rng);
    int ext_x = 0, ext_y = 0, ext_z = 0;
    for (const auto& c : shape.cells) {
      ext_x = std::max(ext_x, c.x);
      ext_y = std::max(ext_y, c.y);
      ext_z = std::max(ext_z, c.z);
    }
    Coordinate anchor{uniform(rng, bounds.x_min, bounds.x_max - ext_x), bounds.y_min,
                      uniform(rng, bounds.z_min, bounds.z_max - ext_z)};
    BlockSet gold;
    for (const auto& c : shape.cells) gold.insert(anchor + c);

    // Some episodes start from a partly built grid.
    BlockSet before;
    int existing = uniform(rng, 0, 3) == 0 ? uniform(rng, 1, 3) : 0;
    for (int k = 0; k < existing * 8 && static_cast<int>(before.size()) < existing; ++k) {
      Coordinate c{uniform(rng, bounds.x_min, bounds.x_max), bounds.y_min, uniform(rng, bounds.z_min, bounds.z_max)};
      bool clear = true;
      for (const auto& g : gold) {
        if (std::abs(g.x - c.x) <= 1 && std::abs(g.z - c.z) <= 1) clear = false;
      }
      if (clear) before.insert(c);
    }

    std::string verb = kVerbs[uniform(rng, 0, 3)];
    Episode e;
    e.id = id;
    e.dialogue = verb + " " + shape.phrase + " " + location_phrase(gold, bounds);
    e.grid_before = GridState(bounds, before);
    e.gold = additions(gold);
    e.split = Split::Train;
    e.validate();
    out.push_back(std::move(e));
  }
  return out;
}

// Splits ---------------------------------------------------------------------------

std::vector<Episode> split(std::vector<Episode> episodes, const SplitFractions& f, std::uint64_t seed) {
  double fr[3] = {f.train, f.valid, f.test};
  double sum = 0;
  for (double x : fr) {
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::BadFractions, "fractions must lie in [0,1]");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::BadFractions, "fractions must sum to 1");

  std::mt19937_64 rng(derive_seed(seed, {"split"}));
  for (std::size_t i = episodes.size(); i > 1; --i) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(episodes[i - 1], episodes[j]);
  }

  const std::size_t n = episodes.size();
  std::size_t counts[3];
  double rem[3];
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    double exact = fr[k] * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  int order[3] = {0, 1, 2};
  std::stable_sort(order, order + 3, [&](int a, int b) { return rem[a] > rem[b]; });
  for (int k = 0; assigned < n; k = (k + 1) % 3) {
    ++counts[order[k]];
    ++assigned;
  }

  const Split labels[3] = {Split::Train, Split::Valid, Split::Test};
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    for (std::size_t c = 0; c < counts[k]; ++c) episodes[pos++].split = labels[k];
  }
  return episodes;
}

std::vector<Episode> filter_split(const std::vector<Episode>& episodes, Split s) {
  std::vector<Episode> out;
  for (const auto& e : episodes) {
    if (e.split == s) out.push_back(e);
  }
  return out;
}

// Episode storage ------------------------------------------------------------------

nlohmann::json episode_to_json(const Episode& e) {
  return {{"id", e.id},
          {"dialogue", e.dialogue},
          {"grid_before", grid_to_json(e.grid_before)},
          {"gold", diff_to_json(e.gold)},
          {"split", to_string(e.split)}};
}

Episode episode_from_json(const nlohmann::json& j) {
  try {
    Episode e;
    e.id = j.at("id").get<std::string>();
    e.dialogue = j.at("dialogue").get<std::string>();
    e.grid_before = grid_from_json(j.at("grid_before"));
    e.gold = diff_from_json(j.at("gold"));
    e.split = j.contains("split") ? split_from_string(j.at("split").get<std::string>()) : Split::Train;
    e.validate();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::SchemaError, std::string("episode: ") + ex.what());
  }
}

void write_episodes_jsonl(const std::string& path, const std::vector<Episode>& episodes) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path);
  for (const auto& e : episodes) out << episode_to_json(e).dump() << '\n';
}

std::vector<Episode> read_episodes_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path);
  std::vector<Episode> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(episode_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& ex) {
      throw Error(ErrorCode::SchemaError, path + ":" + std::to_string(lineno) + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ex.code(), path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace iglu
