#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace uavad {

inline constexpr int kNumCategories = 8;

/// Object vocabulary of the detector. Ids are stable and contiguous.
enum class Category : std::uint8_t {
  car = 0,
  pedestrian = 1,
  bus = 2,
  van = 3,
  truck = 4,
  bicycle = 5,
  motorbike = 6,
  trailer = 7,
};

[[nodiscard]] std::string_view category_name(Category c);
[[nodiscard]] Category category_from_name(std::string_view name);
[[nodiscard]] Category category_from_id(int id);
[[nodiscard]] inline int category_id(Category c) { return static_cast<int>(c); }
/// True for every category except pedestrian.
[[nodiscard]] inline bool is_vehicle(Category c) { return c != Category::pedestrian; }

/// Image size in pixels and the number of grid cells along each axis.
/// Cell sizes are exact real quotients.
class GridSpec {
 public:
  GridSpec(int image_width, int image_height, int cells_x, int cells_y);

  /// 1080x1080 pixels split into 16x16 cells.
  static GridSpec default_spec() { return GridSpec(1080, 1080, 16, 16); }

  [[nodiscard]] int image_width() const { return image_width_; }
  [[nodiscard]] int image_height() const { return image_height_; }
  [[nodiscard]] int cells_x() const { return cells_x_; }
  [[nodiscard]] int cells_y() const { return cells_y_; }
  [[nodiscard]] double cell_width() const { return static_cast<double>(image_width_) / cells_x_; }
  [[nodiscard]] double cell_height() const { return static_cast<double>(image_height_) / cells_y_; }
  [[nodiscard]] std::size_t num_cells() const { return static_cast<std::size_t>(cells_x_) * cells_y_; }
  /// Length of the flattened tensor.
  [[nodiscard]] std::size_t flat_size() const { return num_cells() * kNumCategories; }

  bool operator==(const GridSpec&) const = default;

 private:
  int image_width_;
  int image_height_;
  int cells_x_;
  int cells_y_;
};

struct BoundingBox {
  Category category;
  double x_min;
  double y_min;
  double x_max;
  double y_max;

  [[nodiscard]] bool valid_for(const GridSpec& spec) const;
};

struct GpsLabel {
  double latitude = 0.0;
  double longitude = 0.0;

  GpsLabel() = default;
  GpsLabel(double lat, double lon);

  bool operator==(const GpsLabel&) const = default;
};

struct CellIndex {
  int row;
  int col;

  auto operator<=>(const CellIndex&) const = default;
};

/// One occupied (row, col, category) element of a grid tensor.
struct Cell {
  int row;
  int col;
  Category category;

  auto operator<=>(const Cell&) const = default;
};

/// Binary occupancy tensor of shape cells_y x cells_x x categories,
/// stored row-major in (row, col, category) order.
class GridTensor {
 public:
  explicit GridTensor(GridSpec spec);

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] bool at(int row, int col, Category c) const { return data_[index(row, col, c)] != 0; }
  void set(int row, int col, Category c, bool value = true);
  [[nodiscard]] std::size_t popcount() const;
  [[nodiscard]] std::size_t index(int row, int col, Category c) const;
  /// Occupied elements in flatten order.
  [[nodiscard]] std::vector<Cell> cells() const;
  [[nodiscard]] std::span<const std::uint8_t> raw() const { return data_; }

  bool operator==(const GridTensor&) const = default;

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> data_;
};

[[nodiscard]] CellIndex cell_of_center(const BoundingBox& box, const GridSpec& spec);

/// Marks the cell holding each box center. Throws ConfigError on an invalid box.
[[nodiscard]] GridTensor rasterize(std::span<const BoundingBox> boxes, const GridSpec& spec);

[[nodiscard]] std::vector<double> flatten(const GridTensor& g);
/// Throws ShapeError on a length mismatch or ConfigError on non-binary values.
[[nodiscard]] GridTensor unflatten(std::span<const double> v, const GridSpec& spec);

enum class DiffDirection { removed, added };

struct CellDiff {
  int row;
  int col;
  Category category;
  DiffDirection direction;

  auto operator<=>(const CellDiff&) const = default;
};

/// removed: a=1, b=0. added: a=0, b=1. Sorted by (row, col, category).
[[nodiscard]] std::vector<CellDiff> diff_cells(const GridTensor& a, const GridTensor& b);

/// One glyph per cell: '.' empty, category initial when one category is
/// present, '*' for several.
[[nodiscard]] std::string render_text(const GridTensor& g);

// JSON Lines records -------------------------------------------------------

/// One annotated scene as produced by an object detector.
struct AnnotationRecord {
  int image_width;
  int image_height;
  GpsLabel gps;
  std::vector<BoundingBox> boxes;
};

/// A grid scene with its GPS label.
struct GridRecord {
  GridTensor grid;
  std::optional<GpsLabel> gps;  // absent for scenes recorded without a fix
};

[[nodiscard]] AnnotationRecord parse_annotation_record(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const AnnotationRecord& r);

/// Converts an annotation record to a grid. Boxes outside the image are
/// dropped and reported through the log.
[[nodiscard]] GridRecord grid_from_annotation(const AnnotationRecord& r, int cells_x, int cells_y);

[[nodiscard]] GridRecord parse_grid_record(const nlohmann::json& j, const GridSpec& spec);
/// Sparse form {"gps": [lat, lon], "cells": [[name, row, col], ...]}. The
/// "gps" key is omitted when there is no label.
[[nodiscard]] nlohmann::json to_json(const GridTensor& g, const std::optional<GpsLabel>& gps);

[[nodiscard]] nlohmann::json to_json(const GridSpec& spec);
[[nodiscard]] GridSpec grid_spec_from_json(const nlohmann::json& j);

}  // namespace uavad
