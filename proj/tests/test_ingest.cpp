#include "semplace/ingest.hpp"

#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace semplace;

namespace {

VisitRecord visit(std::string place, std::int64_t a, std::int64_t b)
{
  return { std::move(place), "v", a, b };
}

} // namespace

TEST(InferLocation, SingleWifiObservation)
{
  std::vector<VisitRecord> v{ visit("p", 100, 200) };
  std::vector<WifiObservation> w{ { "ap", GeoPoint(46.5, 6.6), 150 } };
  const auto r = infer_place_location("p", v, w, {});
  EXPECT_EQ(r.source, LocationSource::wifi);
  EXPECT_EQ(r.sample_count, 1u);
  ASSERT_TRUE(r.location);
  EXPECT_EQ(r.location->lat(), 46.5);
  EXPECT_EQ(r.location->lon(), 6.6);
}

TEST(InferLocation, WifiMean)
{
  std::vector<VisitRecord> v{ visit("p", 100, 200) };
  std::vector<WifiObservation> w{ { "a", GeoPoint(46.0, 6.0), 120 },
                                  { "b", GeoPoint(47.0, 7.0), 180 } };
  const auto r = infer_place_location("p", v, w, {});
  EXPECT_EQ(r.source, LocationSource::wifi);
  EXPECT_EQ(r.sample_count, 2u);
  EXPECT_EQ(r.location->lat(), 46.5);
  EXPECT_EQ(r.location->lon(), 6.5);
}

TEST(InferLocation, GpsFallback)
{
  std::vector<VisitRecord> v{ visit("p", 100, 200) };
  std::vector<WifiObservation> w{ { "a", GeoPoint(46.0, 6.0), 99 } };
  std::vector<GpsSample> g{ { GeoPoint(10, 10), 100 }, { GeoPoint(12, 14), 200 },
                            { GeoPoint(80, 80), 201 } };
  const auto r = infer_place_location("p", v, w, g);
  EXPECT_EQ(r.source, LocationSource::gps);
  EXPECT_EQ(r.sample_count, 2u);
  EXPECT_EQ(r.location->lat(), 11.0);
  EXPECT_EQ(r.location->lon(), 12.0);
}

TEST(InferLocation, NothingInWindow)
{
  std::vector<VisitRecord> v{ visit("p", 100, 200) };
  std::vector<WifiObservation> w{ { "a", GeoPoint(46.0, 6.0), 50 } };
  std::vector<GpsSample> g{ { GeoPoint(10, 10), 300 } };
  const auto r = infer_place_location("p", v, w, g);
  EXPECT_EQ(r.source, LocationSource::none);
  EXPECT_FALSE(r.location);
  EXPECT_EQ(r.sample_count, 0u);
  EXPECT_EQ(infer_place_location("p", {}, w, g).source, LocationSource::none);
}

TEST(InferLocation, WifiSuppressesGps)
{
  std::vector<VisitRecord> v{ visit("p", 0, 10), visit("p", 20, 30) };
  std::vector<WifiObservation> w{ { "a", GeoPoint(1, 1), 25 } };
  std::vector<GpsSample> g{ { GeoPoint(50, 50), 5 }, { GeoPoint(60, 60), 22 } };
  const auto r = infer_place_location("p", v, w, g);
  EXPECT_EQ(r.source, LocationSource::wifi);
  EXPECT_EQ(*r.location, GeoPoint(1, 1));
}

TEST(InferLocation, RepeatedApSightingsEachCount)
{
  std::vector<VisitRecord> v{ visit("p", 0, 100) };
  std::vector<WifiObservation> w{ { "a", GeoPoint(0, 0), 1 },
                                  { "a", GeoPoint(0, 0), 2 },
                                  { "b", GeoPoint(3, 3), 3 } };
  const auto r = infer_place_location("p", v, w, {});
  EXPECT_EQ(r.sample_count, 3u);
  EXPECT_EQ(r.location->lat(), 1.0);

  InferenceOptions dedupe;
  dedupe.dedupe_access_points = true;
  const auto d = infer_place_location("p", v, w, {}, dedupe);
  EXPECT_EQ(d.sample_count, 2u);
  EXPECT_EQ(d.location->lat(), 1.5);
}

TEST(InferLocation, OverlappingVisitsCountAnObservationOnce)
{
  std::vector<VisitRecord> v{ visit("p", 0, 100), visit("p", 50, 150) };
  std::vector<WifiObservation> w{ { "a", GeoPoint(2, 2), 75 }, { "b", GeoPoint(4, 4), 140 } };
  const auto r = infer_place_location("p", v, w, {});
  EXPECT_EQ(r.sample_count, 2u);
  EXPECT_EQ(r.location->lat(), 3.0);
}

TEST(InferLocation, IdenticalPointsMeanExactly)
{
  std::vector<VisitRecord> v{ visit("p", 0, 100) };
  std::vector<WifiObservation> w;
  for (int i = 0; i < 7; ++i) {
    w.push_back({ "a", GeoPoint(46.516, 6.6323), i });
  }
  const auto r = infer_place_location("p", v, w, {});
  EXPECT_EQ(*r.location, GeoPoint(46.516, 6.6323));
}

TEST(InferLocation, SphericalCentroidAcrossAntimeridian)
{
  std::vector<VisitRecord> v{ visit("p", 0, 100) };
  std::vector<WifiObservation> w{ { "a", GeoPoint(0, 179), 1 }, { "b", GeoPoint(0, -179), 2 } };
  EXPECT_NEAR(infer_place_location("p", v, w, {}).location->lon(), 0.0, 1e-12);
  InferenceOptions sph;
  sph.centroid = CentroidMode::spherical;
  EXPECT_NEAR(std::fabs(infer_place_location("p", v, w, {}, sph).location->lon()), 180.0, 1e-9);
}

TEST(InferLocation, Errors)
{
  std::vector<VisitRecord> v{ visit("p", 0, 100), visit("q", 0, 100) };
  EXPECT_THROW(infer_place_location("p", v, {}, {}), InputError);
  std::vector<VisitRecord> bad{ visit("p", 10, 5) };
  EXPECT_THROW(infer_place_location("p", bad, {}, {}), ValidationError);
}

TEST(InferLocations, PipelineExcludesUnresolved)
{
  std::vector<PlaceLabel> labels{ { "w", SemanticLabel::home },
                                  { "g", SemanticLabel::work },
                                  { "n", SemanticLabel::shop },
                                  { "novisits", SemanticLabel::shop } };
  std::vector<VisitRecord> visits{ visit("w", 0, 10), visit("g", 20, 30), visit("n", 40, 50),
                                   visit("unlabeled", 0, 100) };
  std::vector<WifiObservation> wifi{ { "a", GeoPoint(1, 1), 5 } };
  std::vector<GpsSample> gps{ { GeoPoint(2, 2), 25 } };
  const auto s = infer_locations(labels, visits, wifi, gps);
  ASSERT_EQ(s.results.size(), 4u);
  EXPECT_EQ(s.results[0].source, LocationSource::wifi);
  EXPECT_EQ(s.results[1].source, LocationSource::gps);
  EXPECT_EQ(s.results[2].source, LocationSource::none);
  EXPECT_EQ(s.results[3].source, LocationSource::none);
  ASSERT_EQ(s.places.size(), 2u);
  EXPECT_EQ(s.places[0].place_id, "w");
  EXPECT_EQ(s.places[1].place_id, "g");
}

TEST(PlacesFile, EmptyWithHeader)
{
  TempDir dir;
  const auto p = dir.write("places.csv", "place_id,label,lat,lon\n");
  EXPECT_TRUE(load_places(p).empty());
}

TEST(PlacesFile, OutOfRangeLatitudeNamesLine)
{
  TempDir dir;
  const auto p = dir.write("places.csv", "place_id,label,lat,lon\nx,HOME,91,6.6\n");
  try {
    load_places(p);
    FAIL() << "expected a validation error";
  } catch (const LineValidationError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(PlacesFile, MalformedRowsNameLine)
{
  TempDir dir;
  auto expect_parse_line = [&](const std::string& body, std::size_t line) {
    const auto p = dir.write("bad.csv", body);
    try {
      load_places(p);
      FAIL() << "expected a parse error for:\n" << body;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line);
    }
  };
  expect_parse_line("place_id,label,lat,lon\na,HOME,1,2\nb,HOME,abc,2\n", 3);
  expect_parse_line("place_id,label,lat,lon\na,HOME,1\n", 2);
  expect_parse_line("id,label,lat,lon\n", 1);
  expect_parse_line("", 1);

  const auto p = dir.write("lab.csv", "place_id,label,lat,lon\na,CAFE,1,2\n");
  EXPECT_THROW(load_places(p), LineValidationError);
  const auto d = dir.write("dup.csv", "place_id,label,lat,lon\na,HOME,1,2\na,WORK,1,2\n");
  EXPECT_THROW(load_places(d), LineValidationError);
}

TEST(PlacesFile, RoundTripIsLossless)
{
  TempDir dir;
  std::mt19937_64 rng(5);
  std::vector<LabeledPlace> places;
  std::uniform_int_distribution<std::size_t> lab(0, 9);
  for (std::size_t i = 0; i < 100; ++i) {
    std::string id = "place-" + std::to_string(i);
    if (i % 17 == 0) {
      id += ",with \"comma\"";
    }
    places.push_back({ id, synth::uniform_point(rng), label_at(lab(rng)) });
  }
  const auto p = dir.file("places.csv");
  write_places(p, places);
  EXPECT_EQ(load_places(p), places);
}

TEST(PlacesFile, AcceptsCrlfAndBlankLines)
{
  TempDir dir;
  const auto p = dir.write("places.csv", "place_id,label,lat,lon\r\na,home,46.5,6.6\r\n\r\n");
  const auto v = load_places(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].label, SemanticLabel::home);
}

TEST(RawLogs, Load)
{
  TempDir dir;
  const auto visits = load_visits(dir.write("v.csv", "place_id,visit_id,start_ts,end_ts\np,1,10,20\n"));
  ASSERT_EQ(visits.size(), 1u);
  EXPECT_EQ(visits[0].end_ts, 20);
  EXPECT_THROW(load_visits(dir.write("v2.csv", "place_id,visit_id,start_ts,end_ts\np,1,30,20\n")),
               LineValidationError);
  const auto wifi = load_wifi(dir.write("w.csv", "ap_id,lat,lon,ts\nap1,46.5,6.6,15\n"));
  ASSERT_EQ(wifi.size(), 1u);
  EXPECT_EQ(wifi[0].ap_id, "ap1");
  const auto gps = load_gps(dir.write("g.csv", "lat,lon,ts\n46.5,6.6,15\n"));
  ASSERT_EQ(gps.size(), 1u);
  EXPECT_THROW(load_gps(dir.write("g2.csv", "lat,lon,ts\n46.5,6.6,1.5\n")), ParseError);
  const auto labels = load_place_labels(dir.write("l.csv", "place_id,label\np,WORK\n"));
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].label, SemanticLabel::work);
  EXPECT_THROW(load_visits(dir.file("missing.csv")), IoError);
}

TEST(ExternalScores, Load)
{
  TempDir dir;
  std::string header = "place_id";
  // columns deliberately in reverse order
  for (std::size_t i = kLabelCount; i-- > 0;) {
    header += "," + std::string(kLabelNames[i]);
  }
  const auto p = dir.write("s.csv", header + "\nx,0,0,0,0,0,0,0,0,0.25,0.75\n");
  const auto s = load_external_scores(p);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.at("x")[index_of(SemanticLabel::bar_restaurant)], 0.75);
  EXPECT_EQ(s.at("x")[index_of(SemanticLabel::outdoor_sports)], 0.25);

  EXPECT_THROW(load_external_scores(dir.write("bad.csv", "place_id,HOME\nx,1\n")), ParseError);
  EXPECT_THROW(load_external_scores(dir.write("neg.csv", header + "\nx,0,0,0,0,0,0,0,0,-1,0\n")),
               LineValidationError);
}
