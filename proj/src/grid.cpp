#include "uavad/grid.hpp"

#include <algorithm>
#include <cmath>

#include "uavad/error.hpp"
#include "uavad/log.hpp"

namespace uavad {

namespace {

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "car", "pedestrian", "bus", "van", "truck", "bicycle", "motorbike", "trailer"};

int clamp_index(double coord, double cell_size, int n) {
  const auto i = static_cast<long long>(std::floor(coord / cell_size));
  return static_cast<int>(std::clamp<long long>(i, 0, n - 1));
}

}  // namespace

std::string_view category_name(Category c) { return kCategoryNames.at(static_cast<std::size_t>(c)); }

Category category_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  throw ConfigError("unknown object category '" + std::string(name) + "'");
}

Category category_from_id(int id) {
  if (id < 0 || id >= kNumCategories) {
    throw ConfigError("category id " + std::to_string(id) + " outside [0, 8)");
  }
  return static_cast<Category>(id);
}

GridSpec::GridSpec(int image_width, int image_height, int cells_x, int cells_y)
    : image_width_(image_width), image_height_(image_height), cells_x_(cells_x), cells_y_(cells_y) {
  if (cells_x < 1 || cells_y < 1 || image_width < cells_x || image_height < cells_y) {
    throw ConfigError("invalid grid spec: image " + std::to_string(image_width) + "x" +
                      std::to_string(image_height) + ", cells " + std::to_string(cells_x) + "x" +
                      std::to_string(cells_y));
  }
}

bool BoundingBox::valid_for(const GridSpec& spec) const {
  return 0.0 <= x_min && x_min < x_max && x_max <= spec.image_width() && 0.0 <= y_min &&
         y_min < y_max && y_max <= spec.image_height();
}

GpsLabel::GpsLabel(double lat, double lon) : latitude(lat), longitude(lon) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    throw ConfigError("GPS label out of range: (" + std::to_string(lat) + ", " + std::to_string(lon) +
                      ")");
  }
}

GridTensor::GridTensor(GridSpec spec) : spec_(spec), data_(spec.flat_size(), 0) {}

std::size_t GridTensor::index(int row, int col, Category c) const {
  if (row < 0 || row >= spec_.cells_y() || col < 0 || col >= spec_.cells_x()) {
    throw ShapeError("cell (" + std::to_string(row) + ", " + std::to_string(col) + ") outside grid");
  }
  return (static_cast<std::size_t>(row) * spec_.cells_x() + col) * kNumCategories + category_id(c);
}

void GridTensor::set(int row, int col, Category c, bool value) { data_[index(row, col, c)] = value ? 1 : 0; }

std::size_t GridTensor::popcount() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

std::vector<Cell> GridTensor::cells() const {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] == 0) continue;
    const auto cell = i / kNumCategories;
    out.push_back({static_cast<int>(cell / spec_.cells_x()), static_cast<int>(cell % spec_.cells_x()),
                   static_cast<Category>(i % kNumCategories)});
  }
  return out;
}

CellIndex cell_of_center(const BoundingBox& box, const GridSpec& spec) {
  const double cx = (box.x_min + box.x_max) / 2.0;
  const double cy = (box.y_min + box.y_max) / 2.0;
  return {clamp_index(cy, spec.cell_height(), spec.cells_y()),
          clamp_index(cx, spec.cell_width(), spec.cells_x())};
}

GridTensor rasterize(std::span<const BoundingBox> boxes, const GridSpec& spec) {
  GridTensor g(spec);
  for (const auto& box : boxes) {
    if (category_id(box.category) < 0 || category_id(box.category) >= kNumCategories) {
      throw ConfigError("box category id " + std::to_string(category_id(box.category)) + " out of range");
    }
    if (!box.valid_for(spec)) throw ConfigError("bounding box outside the image");
    const auto [row, col] = cell_of_center(box, spec);
    g.set(row, col, box.category);
  }
  return g;
}

std::vector<double> flatten(const GridTensor& g) {
  const auto raw = g.raw();
  return {raw.begin(), raw.end()};
}

GridTensor unflatten(std::span<const double> v, const GridSpec& spec) {
  if (v.size() != spec.flat_size()) {
    throw ShapeError("unflatten: expected length " + std::to_string(spec.flat_size()) + ", got " +
                     std::to_string(v.size()));
  }
  GridTensor g(spec);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0 && v[i] != 1.0) throw ConfigError("unflatten: non-binary value at index " + std::to_string(i));
    if (v[i] == 1.0) {
      const auto cell = i / kNumCategories;
      g.set(static_cast<int>(cell / spec.cells_x()), static_cast<int>(cell % spec.cells_x()),
            static_cast<Category>(i % kNumCategories));
    }
  }
  return g;
}

std::vector<CellDiff> diff_cells(const GridTensor& a, const GridTensor& b) {
  if (!(a.spec() == b.spec())) throw ShapeError("diff_cells: grid specs differ");
  std::vector<CellDiff> out;
  const auto ra = a.raw();
  const auto rb = b.raw();
  const int cols = a.spec().cells_x();
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (ra[i] == rb[i]) continue;
    const auto cell = i / kNumCategories;
    out.push_back({static_cast<int>(cell / cols), static_cast<int>(cell % cols),
                   static_cast<Category>(i % kNumCategories),
                   ra[i] ? DiffDirection::removed : DiffDirection::added});
  }
  return out;
}

std::string render_text(const GridTensor& g) {
  const auto& spec = g.spec();
  std::string out;
  out.reserve(spec.num_cells() + spec.cells_y());
  for (int r = 0; r < spec.cells_y(); ++r) {
    for (int c = 0; c < spec.cells_x(); ++c) {
      int count = 0;
      char glyph = '.';
      for (int k = 0; k < kNumCategories; ++k) {
        if (g.at(r, c, static_cast<Category>(k))) {
          ++count;
          glyph = category_name(static_cast<Category>(k)).front();
        }
      }
      out.push_back(count > 1 ? '*' : glyph);
    }
    out.push_back('\n');
  }
  return out;
}

// JSON -----------------------------------------------------------------------

namespace {

GpsLabel gps_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("gps must be [lat, lon]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

AnnotationRecord parse_annotation_record(const nlohmann::json& j) {
  AnnotationRecord r{j.at("image_width").get<int>(), j.at("image_height").get<int>(),
                     gps_from_json(j.at("gps")), {}};
  for (const auto& b : j.at("boxes")) {
    r.boxes.push_back({category_from_name(b.at("category").get<std::string>()), b.at("x_min").get<double>(),
                       b.at("y_min").get<double>(), b.at("x_max").get<double>(), b.at("y_max").get<double>()});
  }
  return r;
}

nlohmann::json to_json(const AnnotationRecord& r) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : r.boxes) {
    boxes.push_back({{"category", category_name(b.category)},
                     {"x_min", b.x_min},
                     {"y_min", b.y_min},
                     {"x_max", b.x_max},
                     {"y_max", b.y_max}});
  }
  return {{"image_width", r.image_width},
          {"image_height", r.image_height},
          {"gps", {r.gps.latitude, r.gps.longitude}},
          {"boxes", boxes}};
}

GridRecord grid_from_annotation(const AnnotationRecord& r, int cells_x, int cells_y) {
  const GridSpec spec(r.image_width, r.image_height, cells_x, cells_y);
  std::vector<BoundingBox> kept;
  kept.reserve(r.boxes.size());
  for (const auto& b : r.boxes) {
    if (b.valid_for(spec)) {
      kept.push_back(b);
    } else {
      logger().warn("dropping {} box [{}, {}, {}, {}] outside {}x{} image", category_name(b.category), b.x_min,
                    b.y_min, b.x_max, b.y_max, r.image_width, r.image_height);
    }
  }
  return {rasterize(kept, spec), r.gps};
}

GridRecord parse_grid_record(const nlohmann::json& j, const GridSpec& spec) {
  GridTensor g(spec);
  for (const auto& c : j.at("cells")) {
    if (!c.is_array() || c.size() != 3) throw ConfigError("grid cell must be [category, row, col]");
    const int row = c.at(1).get<int>();
    const int col = c.at(2).get<int>();
    if (row < 0 || row >= spec.cells_y() || col < 0 || col >= spec.cells_x()) {
      throw ConfigError("grid cell (" + std::to_string(row) + ", " + std::to_string(col) + ") outside grid");
    }
    g.set(row, col, category_from_name(c.at(0).get<std::string>()));
  }
  std::optional<GpsLabel> gps;
  if (j.contains("gps") && !j.at("gps").is_null()) gps = gps_from_json(j.at("gps"));
  return {std::move(g), gps};
}

nlohmann::json to_json(const GridTensor& g, const std::optional<GpsLabel>& gps) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : g.cells()) cells.push_back({category_name(c.category), c.row, c.col});
  nlohmann::json j = nlohmann::json::object();
  if (gps) j["gps"] = {gps->latitude, gps->longitude};
  j["cells"] = std::move(cells);
  return j;
}

nlohmann::json to_json(const GridSpec& spec) {
  return {{"image_width", spec.image_width()},
          {"image_height", spec.image_height()},
          {"cells_x", spec.cells_x()},
          {"cells_y", spec.cells_y()}};
}

GridSpec grid_spec_from_json(const nlohmann::json& j) {
  return {j.at("image_width").get<int>(), j.at("image_height").get<int>(), j.at("cells_x").get<int>(),
          j.at("cells_y").get<int>()};
}

}  // namespace uavad
