#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "relnav/error.hpp"
#include "relnav/scene.hpp"
#include "support/fermat_oracle.hpp"

using namespace relnav;
using scene::Building;
using scene::QueryOptions;
using scene::ReceiverPose;
using scene::ReceptionCondition;
using scene::RoadSegment;
using scene::Scene;
using scene::Vec2;
using orbits::Vec3;

namespace {

const orbits::GeodeticPosition kOrigin{deg2rad(34.05), deg2rad(-118.25), 50.0};

Building box(double x0, double y0, double x1, double y1, double h, double coeff) {
  Building b;
  b.footprint = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  b.height = h;
  b.reflection_coefficient = coeff;
  return b;
}

RoadSegment straight_road() {
  RoadSegment r;
  r.centerline = {{-100.0, 0.0}, {100.0, 0.0}};
  r.lane_count = 2;
  return r;
}

orbits::SatelliteState sat_at(const Scene& sc, const Vec3& local) {
  orbits::SatelliteState s;
  s.sat_id.value = "G01";
  s.position_ecef = sc.to_ecef(local);
  return s;
}

using testsupport::fermat_plane_wave;

}  // namespace

TEST_CASE("building validation enforces simple CCW positive-height footprints") {
  CHECK_NOTHROW(box(0, 0, 10, 10, 5, 0.5).validate());

  Building cw = box(0, 0, 10, 10, 5, 0.5);
  std::reverse(cw.footprint.begin(), cw.footprint.end());
  CHECK_THROWS_AS(cw.validate(), Error);

  Building bow = box(0, 0, 10, 10, 5, 0.5);
  std::swap(bow.footprint[1], bow.footprint[2]);  // self-intersecting
  CHECK_THROWS_AS(bow.validate(), Error);

  Building flat = box(0, 0, 10, 10, 0.0, 0.5);
  CHECK_THROWS_AS(flat.validate(), Error);

  Building shiny = box(0, 0, 10, 10, 5, 1.5);
  CHECK_THROWS_AS(shiny.validate(), Error);
}

TEST_CASE("facets carry outward normals") {
  const Scene sc(kOrigin, {box(-10, 5, 10, 9, 20, 0.5)}, {straight_road()});
  REQUIRE(sc.facets().size() == 4);
  // The south wall (from (-10,5) to (10,5)) must face -y, toward the road.
  bool found_south = false;
  for (const auto& f : sc.facets()) {
    if (std::abs(f.a.y() - 5.0) < 1e-12 && std::abs(f.b.y() - 5.0) < 1e-12) {
      CHECK(f.normal.y() == doctest::Approx(-1.0));
      CHECK(std::abs(f.normal.x()) < 1e-12);
      found_south = true;
    }
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-12);
  }
  CHECK(found_south);
}

TEST_CASE("line of sight blocking against walls and roofs") {
  const Scene sc(kOrigin, {box(-10, 5, 10, 9, 20, 0.5)}, {straight_road()});
  ReceiverPose rx;
  rx.position = {0.0, 0.0, 0.0};

  // Toward the wall at shallow elevation: blocked.
  CHECK(scene::los_blocked(sc, rx, Vec3{0.0, 1.0, 0.3}.normalized()));
  // Same azimuth but steep enough to clear the 20 m top at 5 m distance.
  CHECK_FALSE(scene::los_blocked(sc, rx, Vec3{0.0, 1.0, 8.0}.normalized()));
  // Away from the building: clear.
  CHECK_FALSE(scene::los_blocked(sc, rx, Vec3{0.0, -1.0, 0.3}.normalized()));
  // Straight up: clear (receiver is outside the footprint).
  CHECK_FALSE(scene::los_blocked(sc, rx, Vec3{0.0, 0.0, 1.0}));

  // From inside the footprint looking up, the roof blocks.
  ReceiverPose inside;
  inside.position = {0.0, 7.0, 0.0};
  CHECK(scene::los_blocked(sc, inside, Vec3{0.05, 0.0, 1.0}.normalized()));
}

TEST_CASE("aligned single wall reproduces the 2 d cos(el) excess") {
  for (double d : {5.0, 10.0, 20.0}) {
    for (double el_deg : {20.0, 33.0, 45.0, 60.0}) {
      const Scene sc(kOrigin, {box(-40, d, 40, d + 2, 60, 0.6)}, {straight_road()});
      ReceiverPose rx;
      rx.position = {0.0, 0.0, 0.0};
      const double el = deg2rad(el_deg);
      // Satellite due south, so the bounce comes straight off the wall.
      const Vec3 dir{0.0, -std::cos(el), std::sin(el)};
      const auto paths = scene::reflections(sc, rx, dir);
      REQUIRE(paths.size() == 1);
      const double d_eff = d - rx.position.y();
      CHECK(paths[0].path_length_excess ==
            doctest::Approx(2.0 * d_eff * std::cos(el)).epsilon(1e-12));
      CHECK(paths[0].amplitude_ratio == doctest::Approx(0.6));
      // Specular point sits halfway up the two-ray triangle, on the wall.
      CHECK(paths[0].reflection_point.y() == doctest::Approx(d).epsilon(1e-9));
    }
  }
}

TEST_CASE("image method agrees with the Fermat sampling oracle") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  int checked = 0;
  int attempts = 0;
  while (checked < 100 && attempts < 2000) {
    ++attempts;
    const bool canyon = (attempts % 2) == 0;
    const double d1 = 6.0 + 20.0 * ud(rng);
    const double h = 15.0 + 40.0 * ud(rng);
    std::vector<Building> buildings{box(-50, d1, 50, d1 + 3, h, 0.7)};
    if (canyon) buildings.push_back(box(-50, -d1 - 3, 50, -d1, h, 0.7));
    const Scene sc(kOrigin, buildings, {straight_road()});

    ReceiverPose rx;
    rx.position = {-20.0 + 40.0 * ud(rng), -3.0 + 6.0 * ud(rng), 0.0};
    const double az = 2.0 * std::numbers::pi * ud(rng);
    const double el = deg2rad(15.0 + 60.0 * ud(rng));
    const Vec3 dir{std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)};

    const auto paths = scene::reflections(sc, rx, dir);
    if (paths.empty()) continue;
    for (const auto& p : paths) {
      const auto& f = sc.facets()[p.facet_id];
      const auto want = fermat_plane_wave(f, rx.antenna(), dir);
      CHECK(std::abs(p.path_length_excess - want.excess) < 1e-3);
      CHECK((p.reflection_point - want.point).norm() < 1e-3);
    }
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("finite-range reflections converge to the plane-wave ones") {
  const Scene sc(kOrigin, {box(-40, 8, 40, 11, 30, 0.5)}, {straight_road()});
  ReceiverPose rx;
  rx.position = {3.0, -2.0, 0.0};
  const Vec3 dir = Vec3{0.2, -0.8, 0.6}.normalized();

  const auto plane = scene::reflections(sc, rx, dir);
  REQUIRE(plane.size() == 1);

  QueryOptions opts;
  opts.plane_wave = false;
  const auto finite = scene::reflections_finite(sc, rx, rx.antenna() + dir * 2.0e7, opts);
  REQUIRE(finite.size() == 1);
  CHECK(std::abs(finite[0].path_length_excess - plane[0].path_length_excess) < 1e-4);
  CHECK((finite[0].reflection_point - plane[0].reflection_point).norm() < 1e-3);
}

TEST_CASE("occlusion removes paths whose bounce leg is shadowed") {
  // Reflecting wall to the north, blocking slab between it and the receiver.
  std::vector<Building> buildings{box(-40, 20, 40, 23, 40, 0.8), box(-40, 8, 40, 10, 40, 0.0)};
  const Scene sc(kOrigin, buildings, {straight_road()});
  ReceiverPose rx;
  rx.position = {0.0, 0.0, 0.0};
  const double el = deg2rad(30.0);
  const Vec3 dir{0.0, -std::cos(el), std::sin(el)};
  // The slab stands between receiver and the north wall: no reflection
  // survives (the slab itself absorbs, coefficient 0).
  CHECK(scene::reflections(sc, rx, dir).empty());

  // Remove the slab and the path appears.
  const Scene open(kOrigin, {box(-40, 20, 40, 23, 40, 0.8)}, {straight_road()});
  CHECK(scene::reflections(open, rx, dir).size() == 1);
}

TEST_CASE("zero-reflectivity walls block but never reflect") {
  const Scene sc(kOrigin, {box(-40, 8, 40, 11, 30, 0.0)}, {straight_road()});
  ReceiverPose rx;
  rx.position = {0.0, 0.0, 0.0};
  const double el = deg2rad(25.0);
  CHECK(scene::reflections(sc, rx, Vec3{0.0, -std::cos(el), std::sin(el)}).empty());
  CHECK(scene::los_blocked(sc, rx, Vec3{0.0, std::cos(el), std::sin(el)}));
}

TEST_CASE("classification covers the full condition matrix") {
  const Scene sc(kOrigin, {box(-40, 8, 40, 11, 30, 0.5)}, {straight_road()});
  ReceiverPose rx;
  rx.position = {0.0, 0.0, 0.0};
  const double mask = deg2rad(33.0);

  auto dir_to_state = [&](double az_deg, double el_deg) {
    const double az = deg2rad(az_deg), el = deg2rad(el_deg);
    const Vec3 d{std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)};
    return sat_at(sc, rx.antenna() + d * 2.5e7);
  };

  // South satellite, high: direct LOS plus a bounce off the wall.
  auto c = scene::classify(sc, rx, dir_to_state(180.0, 45.0), mask);
  CHECK(c.condition == ReceptionCondition::kLosNlos);
  CHECK_FALSE(c.paths.empty());
  CHECK(c.elevation == doctest::Approx(deg2rad(45.0)).epsilon(1e-6));

  // North satellite at 35 deg: the 30 m wall 8 m away blocks it, and no
  // reflector faces it.
  c = scene::classify(sc, rx, dir_to_state(0.0, 35.0), mask);
  CHECK(c.condition == ReceptionCondition::kNoSignal);

  // Below the mask: no signal regardless of geometry.
  c = scene::classify(sc, rx, dir_to_state(180.0, 20.0), mask);
  CHECK(c.condition == ReceptionCondition::kNoSignal);

  // NLOS-only: receiver tucked behind an absorber slab south of it, with the
  // reflective wall to the north; the southern satellite is blocked but its
  // bounce path over the slab survives.
  std::vector<Building> blds{box(-40, 8, 40, 11, 30, 0.5), box(-40, -6, 40, -4, 12, 0.0)};
  const Scene sc2(kOrigin, blds, {straight_road()});
  const Vec3 d_south{0.0, -std::cos(deg2rad(35.0)), std::sin(deg2rad(35.0))};
  const auto s2 = sat_at(sc2, rx.antenna() + d_south * 2.5e7);
  c = scene::classify(sc2, rx, s2, mask);
  CHECK(c.condition == ReceptionCondition::kNlosOnly);
  REQUIRE_FALSE(c.paths.empty());
  CHECK(c.paths[0].path_length_excess > 0.0);

  CHECK_THROWS_AS(scene::classify(sc, rx, dir_to_state(180.0, 45.0), -0.1), Error);
  CHECK_THROWS_AS(scene::classify(sc, rx, dir_to_state(180.0, 45.0), 1.6), Error);
}

TEST_CASE("scene JSON round trip preserves geometry") {
  const Scene sc(kOrigin, {box(-10, 5, 10, 9, 20, 0.35)}, {straight_road()}, "rt");
  const Scene back = Scene::from_json_text(sc.to_json_text(), "rt");
  REQUIRE(back.buildings().size() == 1);
  CHECK(back.buildings()[0].height == doctest::Approx(20.0));
  CHECK(back.buildings()[0].reflection_coefficient == doctest::Approx(0.35));
  REQUIRE(back.roads().size() == 1);
  CHECK(back.roads()[0].width() == doctest::Approx(7.4));
  CHECK(back.origin().latitude == doctest::Approx(kOrigin.latitude));
  // Local frame anchoring survives the trip.
  const Vec3 p{12.0, -7.0, 3.0};
  CHECK((back.to_local(sc.to_ecef(p)) - p).norm() < 1e-6);
}

TEST_CASE("malformed scene JSON is rejected with a parse error") {
  CHECK_THROWS_AS(Scene::from_json_text("{not json"), Error);
  CHECK_THROWS_AS(Scene::from_json_text(R"({"origin": {}})"), Error);
  CHECK_THROWS_AS(Scene::from_json_file("/nonexistent/scene.json"), Error);
}
