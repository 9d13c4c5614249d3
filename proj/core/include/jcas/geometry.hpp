#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace jcas {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  bool operator==(const Vec2&) const = default;
};

Vec2 operator+(Vec2 a, Vec2 b);
Vec2 operator-(Vec2 a, Vec2 b);
Vec2 operator*(Vec2 a, double s);
double dot(Vec2 a, Vec2 b);
double cross(Vec2 a, Vec2 b);
double norm(Vec2 a);
double distance(Vec2 a, Vec2 b);

// Axis-aligned rectangle. Policy areas and restricted zones are rectangles so
// that intersections stay exact under composition.
struct Rect {
  Vec2 lo;
  Vec2 hi;

  bool operator==(const Rect&) const = default;

  bool valid() const { return hi.x > lo.x && hi.y > lo.y; }
  double area() const { return valid() ? (hi.x - lo.x) * (hi.y - lo.y) : 0.0; }
  bool contains(Vec2 p) const;
  bool contains(const Rect& r) const;
  bool overlaps(const Rect& r) const;
  static std::optional<Rect> intersect(const Rect& a, const Rect& b);
};

// Convex polygon with counter-clockwise vertices. Requests may describe their
// target area as an arbitrary convex region; degenerate (zero-area) polygons
// are invalid.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Vec2> vertices);
  static ConvexPolygon rectangle(const Rect& r);

  bool operator==(const ConvexPolygon&) const = default;

  const std::vector<Vec2>& vertices() const { return vertices_; }
  bool valid() const;
  double area() const;
  bool contains(Vec2 p) const;
  // True iff every vertex of this polygon lies inside r (convexity makes the
  // vertex test sufficient).
  bool within(const Rect& r) const;
  bool overlaps(const Rect& r) const;
  Rect bounding_box() const;

 private:
  std::vector<Vec2> vertices_;
};

// A set of square grid cells at a fixed granularity. Sensing tasks operate on
// cell regions: splitting a request across units and checking coverage become
// exact set operations.
class CellRegion {
 public:
  struct Cell {
    std::int64_t ix{0};
    std::int64_t iy{0};
    auto operator<=>(const Cell&) const = default;
  };

  CellRegion() = default;
  CellRegion(double granularity_m, std::vector<Cell> cells);

  bool operator==(const CellRegion&) const = default;

  // Cells whose center falls inside the polygon clipped to `within`.
  static CellRegion rasterize(const ConvexPolygon& poly, const Rect& within,
                              double granularity_m);

  double granularity() const { return granularity_m_; }
  const std::vector<Cell>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return cells_.size(); }

  Vec2 cell_center(const Cell& c) const;
  bool contains(const Cell& c) const;
  bool subset_of(const CellRegion& other) const;
  CellRegion unite(const CellRegion& other) const;
  CellRegion subtract(const CellRegion& other) const;
  // Cells whose center is within `radius` of `center`.
  CellRegion covered_by(Vec2 center, double radius) const;

 private:
  double granularity_m_{1.0};
  std::vector<Cell> cells_;  // sorted, unique
};

// Floor-quantisation of a point to the granularity grid.
Vec2 quantise(Vec2 p, double granularity_m);
bool on_grid(Vec2 p, double granularity_m);

}  // namespace jcas
