#include <doctest.h>

#include <cmath>

#include "wsol/geometry.hpp"
#include "wsol/rng.hpp"

using wsol::Box;

TEST_CASE("area of axis-aligned boxes") {
  CHECK(wsol::area(Box{0, 0, 10, 10}) == 100.0);
  CHECK(wsol::area(Box{0, 0, 1, 1}) == 1.0);
  CHECK(wsol::area(Box{2.5, 3, 7.5, 8}) == 25.0);
}

TEST_CASE("iou identity, disjoint, and half-overlap cases") {
  const Box a{0, 0, 10, 10};
  CHECK(wsol::iou(a, a) == 1.0);
  CHECK(wsol::iou(a, Box{20, 20, 30, 30}) == 0.0);
  CHECK(wsol::iou(a, Box{5, 0, 15, 10}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Boxes sharing only an edge count as disjoint.
  CHECK(wsol::iou(a, Box{10, 0, 20, 10}) == 0.0);
}

TEST_CASE("iou symmetry and range over random boxes") {
  wsol::Rng rng(99, "geometry-prop");
  for (int i = 0; i < 500; ++i) {
    const Box a{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(51, 100),
                rng.uniform(51, 100)};
    const Box b{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(51, 100),
                rng.uniform(51, 100)};
    const double ab = wsol::iou(a, b);
    CHECK(ab == wsol::iou(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("iou invariant under joint translation and uniform scaling") {
  wsol::Rng rng(100, "geometry-prop2");
  for (int i = 0; i < 200; ++i) {
    const Box a{rng.uniform(0, 40), rng.uniform(0, 40), rng.uniform(41, 90), rng.uniform(41, 90)};
    const Box b{rng.uniform(0, 40), rng.uniform(0, 40), rng.uniform(41, 90), rng.uniform(41, 90)};
    const double dx = rng.uniform(-20, 20), dy = rng.uniform(-20, 20);
    const double sc = rng.uniform(0.2, 5.0);
    auto move = [&](const Box& x) {
      return Box{(x.x_min + dx) * sc, (x.y_min + dy) * sc, (x.x_max + dx) * sc,
                 (x.y_max + dy) * sc};
    };
    CHECK(wsol::iou(move(a), move(b)) == doctest::Approx(wsol::iou(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("intersection_area basic cases") {
  CHECK(wsol::intersection_area(Box{0, 0, 10, 10}, Box{5, 5, 15, 15}) == 25.0);
  CHECK(wsol::intersection_area(Box{0, 0, 2, 2}, Box{3, 3, 4, 4}) == 0.0);
}

TEST_CASE("normalized_size examples and error") {
  CHECK(wsol::normalized_size(Box{0, 0, 20, 20}, 20, 20) == 1.0);
  CHECK(wsol::normalized_size(Box{0, 0, 10, 10}, 20, 20) == 0.25);
  CHECK(wsol::normalized_size(Box{0, 0, 5, 10}, 20, 20) == 0.125);
  CHECK_THROWS_AS(wsol::normalized_size(Box{0, 0, 1, 1}, 0, 20), std::invalid_argument);
  CHECK_THROWS_AS(wsol::normalized_size(Box{0, 0, 1, 1}, 20, -1), std::invalid_argument);
}

TEST_CASE("root_transform examples, inverse, and errors") {
  CHECK(wsol::root_transform(0.125, 3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(wsol::root_transform(1.0, 7) == 1.0);
  // Independent check by exp/log evaluation.
  CHECK(wsol::root_transform(0.3, 3) ==
        doctest::Approx(std::exp(std::log(0.3) / 3.0)).epsilon(1e-12));
  CHECK(wsol::root_transform(0.4, 1) == 0.4);
  CHECK_THROWS_AS(wsol::root_transform(0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(wsol::root_transform(-0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(wsol::root_transform(0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(wsol::root_transform_inverse(0.0, 3), std::invalid_argument);
}

TEST_CASE("root_transform round-trip and monotonicity") {
  wsol::Rng rng(3, "root-prop");
  double prev_s = 0.0, prev_t = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double s = rng.uniform(1e-6, 1.0);
    for (int r : {1, 2, 3, 5}) {
      const double t = wsol::root_transform(s, r);
      CHECK(wsol::root_transform_inverse(t, r) == doctest::Approx(s).epsilon(1e-12));
      CHECK(t > 0.0);
      CHECK(t <= 1.0);
    }
    const double t3 = wsol::root_transform(s, 3);
    if (i > 0 && s > prev_s) CHECK(t3 > prev_t);
    if (i > 0 && s < prev_s) CHECK(t3 < prev_t);
    prev_s = s;
    prev_t = t3;
  }
}

TEST_CASE("clip_to_image pins boxes to the image rectangle") {
  const Box c = wsol::clip_to_image(Box{-5, -3, 25, 12}, 20, 10);
  CHECK(c == Box{0, 0, 20, 10});
  const Box inside = wsol::clip_to_image(Box{1, 2, 3, 4}, 20, 10);
  CHECK(inside == Box{1, 2, 3, 4});
}
