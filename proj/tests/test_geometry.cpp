#include "jcas/geometry.hpp"

#include <gtest/gtest.h>

#include "testkit.hpp"

namespace jcas {
namespace {

TEST(Rect, IntersectAndContain) {
  Rect a{{0, 0}, {10, 10}};
  Rect b{{5, 5}, {20, 20}};
  auto i = Rect::intersect(a, b);
  ASSERT_TRUE(i.has_value());
  EXPECT_EQ(i->lo, (Vec2{5, 5}));
  EXPECT_EQ(i->hi, (Vec2{10, 10}));
  EXPECT_FALSE(Rect::intersect(a, Rect{{11, 11}, {12, 12}}).has_value());
  EXPECT_TRUE(a.contains(Rect{{1, 1}, {9, 9}}));
  EXPECT_FALSE(a.contains(b));
}

TEST(Polygon, RectangleRoundTrip) {
  Rect r{{0, 0}, {4, 3}};
  ConvexPolygon p = ConvexPolygon::rectangle(r);
  EXPECT_TRUE(p.valid());
  EXPECT_DOUBLE_EQ(p.area(), 12.0);
  EXPECT_TRUE(p.contains({2, 1}));
  EXPECT_FALSE(p.contains({5, 1}));
  EXPECT_TRUE(p.within(r));
  EXPECT_TRUE(p.within(Rect{{-1, -1}, {10, 10}}));
  EXPECT_FALSE(p.within(Rect{{1, 1}, {10, 10}}));
}

TEST(Polygon, OrientationNormalised) {
  // Clockwise input still yields a containing polygon.
  ConvexPolygon p{{{0, 0}, {0, 2}, {2, 2}, {2, 0}}};
  EXPECT_TRUE(p.contains({1, 1}));
  EXPECT_DOUBLE_EQ(p.area(), 4.0);
}

TEST(Polygon, DegenerateInvalid) {
  ConvexPolygon line{{{0, 0}, {1, 1}, {2, 2}}};
  EXPECT_FALSE(line.valid());
  EXPECT_FALSE(ConvexPolygon{}.valid());
}

TEST(Polygon, OverlapsRect) {
  ConvexPolygon p = ConvexPolygon::rectangle(Rect{{0, 0}, {10, 10}});
  EXPECT_TRUE(p.overlaps(Rect{{5, 5}, {15, 15}}));
  EXPECT_FALSE(p.overlaps(Rect{{11, 11}, {15, 15}}));
  EXPECT_TRUE(p.overlaps(Rect{{-5, -5}, {50, 50}}));  // rect covers polygon
}

TEST(CellRegion, RasterizeCountsCells) {
  ConvexPolygon p = ConvexPolygon::rectangle(Rect{{0, 0}, {30, 20}});
  CellRegion r =
      CellRegion::rasterize(p, Rect{{-100, -100}, {100, 100}}, 10.0);
  EXPECT_EQ(r.size(), 6u);  // 3 x 2 cells
  EXPECT_TRUE(r.contains({0, 0}));
  EXPECT_TRUE(r.contains({2, 1}));
  EXPECT_FALSE(r.contains({3, 0}));
}

TEST(CellRegion, SetOperations) {
  CellRegion a{10.0, {{0, 0}, {1, 0}, {2, 0}}};
  CellRegion b{10.0, {{1, 0}, {2, 0}, {3, 0}}};
  EXPECT_EQ(a.unite(b).size(), 4u);
  EXPECT_EQ(a.subtract(b).size(), 1u);
  EXPECT_TRUE(CellRegion(10.0, {{1, 0}}).subset_of(a));
  EXPECT_FALSE(a.subset_of(b));
}

TEST(CellRegion, CoverageByCircle) {
  CellRegion a{10.0, {{0, 0}, {5, 5}}};
  // Centers: (5,5) and (55,55).
  CellRegion near = a.covered_by({0, 0}, 10.0);
  EXPECT_EQ(near.size(), 1u);
  EXPECT_TRUE(near.contains({0, 0}));
}

TEST(Quantise, FloorGrid) {
  EXPECT_EQ(quantise({13.7, 22.1}, 10.0), (Vec2{10.0, 20.0}));
  EXPECT_EQ(quantise({-0.1, 0.0}, 10.0), (Vec2{-10.0, 0.0}));
  EXPECT_TRUE(on_grid({10.0, 20.0}, 10.0));
  EXPECT_FALSE(on_grid({13.7, 20.0}, 10.0));
}

}  // namespace
}  // namespace jcas
