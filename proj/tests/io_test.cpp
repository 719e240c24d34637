// Copyright 2026 The scankit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ==============================================================================

#include "scankit/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "scankit/png_io.hpp"

namespace scankit {
namespace {

std::string row(const std::string& img, const std::string& user, double t, double lat, double lon) {
  std::ostringstream os;
  write_record(os, {img, user, t, lat, lon});
  return os.str();
}

IngestResult ingest_text(const std::string& text, IngestConfig cfg = {}) {
  std::istringstream in(text);
  return ingest(in, cfg);
}

TEST(Ingest, Decimates120HzToOneHz) {
  std::string text;
  for (int k = 0; k < 3600; ++k) text += row("img", "u", k / 120.0, 1e-4 * k, 0.5);
  const IngestResult r = ingest_text(text);
  ASSERT_EQ(r.images.size(), 1u);
  const IngestedImage& img = r.images.at("img");
  ASSERT_EQ(img.set.size(), 1u);
  ASSERT_EQ(img.set.scanpaths[0].size(), 30u);
  for (int k = 0; k < 30; ++k) {
    // Nearest sample to t = k + 0.5 is row 60 + 120 k.
    EXPECT_EQ(img.records[0][static_cast<std::size_t>(k)].t, (60 + 120 * k) / 120.0);
    EXPECT_NEAR(unit_to_latlon(img.set.scanpaths[0][static_cast<std::size_t>(k)]).lat, 1e-4 * (60 + 120 * k), 1e-12);
  }
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Ingest, CanonicalFileRoundTripsByteForByte) {
  std::mt19937_64 rng(1);
  std::string text;
  for (const char* user : {"a", "b", "c"})
    for (int k = 0; k < 30; ++k) {
      const GazePoint g = unit_to_latlon(oracle::random_unit(rng));
      text += row("pano", user, k + 0.5, g.lat, g.lon);
    }
  const IngestResult r = ingest_text(text);
  std::ostringstream out;
  write_ingested(out, r);
  EXPECT_EQ(out.str(), text);
  EXPECT_EQ(r.images.at("pano").set.user_ids, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Ingest, OneHzOnIntegerTimesIsIdentity) {
  std::string text;
  for (int k = 0; k < 30; ++k) text += row("i", "u", k, 0.01 * k, -0.02 * k);
  const IngestResult r = ingest_text(text);
  const auto& rec = r.images.at("i").records[0];
  ASSERT_EQ(rec.size(), 30u);
  // Slot k sits halfway between rows k and k+1; the tie goes to row k.
  for (int k = 0; k < 30; ++k) EXPECT_EQ(rec[static_cast<std::size_t>(k)].t, k);
}

TEST(Ingest, GapsRepeatNearestSample) {
  // Rows at 0.2, 0.6, 1.4, then nothing until 4.1, 4.6.
  std::string text;
  for (double t : {0.2, 0.6, 1.4, 4.1, 4.6}) text += row("g", "u", t, 0.0, t / 10);
  IngestConfig cfg;
  cfg.target_length = 5;
  const auto rec = ingest_text(text, cfg).images.at("g").records[0];
  std::vector<double> picked;
  for (const auto& r : rec) picked.push_back(r.t);
  // Targets 0.5, 1.5, 2.5, 3.5, 4.5.
  EXPECT_EQ(picked, (std::vector<double>{0.6, 1.4, 1.4, 4.1, 4.6}));
}

TEST(Ingest, ShortRecordPolicy) {
  std::string text;
  for (int k = 0; k < 12; ++k) text += row("s", "short", k + 0.5, 0.0, 0.0);
  for (int k = 0; k < 30; ++k) text += row("s", "full", k + 0.5, 0.1, 0.0);
  const IngestResult rejected = ingest_text(text);
  EXPECT_EQ(rejected.images.at("s").set.user_ids, (std::vector<std::string>{"full"}));
  ASSERT_EQ(rejected.warnings.size(), 1u);
  EXPECT_NE(rejected.warnings[0].find("rejected"), std::string::npos);
  IngestConfig cfg;
  cfg.short_policy = ShortRecordPolicy::kTruncate;
  const IngestResult truncated = ingest_text(text, cfg);
  ASSERT_EQ(truncated.images.at("s").set.size(), 2u);
  EXPECT_EQ(truncated.images.at("s").set.scanpaths[0].size(), 12u);
  EXPECT_EQ(truncated.images.at("s").set.scanpaths[1].size(), 30u);
}

TEST(Ingest, ErrorsCarryLineNumbers) {
  const std::string good = row("x", "u", 0.5, 0, 0);
  try {
    ingest_text(good + good.substr(0, 10) + "\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    ingest_text(good + "\n" + row("x", "v", 0.5, 0, 0) + row("x", "u", 0.4, 0, 0));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("non-monotone"), std::string::npos);
  }
  EXPECT_THROW(ingest_text("{\"image_id\":\"x\",\"user_id\":\"u\",\"t\":0.5,\"lat\":2.0,\"lon\":0}\n"), ParseError);
  EXPECT_THROW(ingest_text("{\"image_id\":\"x\",\"t\":0.5,\"lat\":0,\"lon\":0}\n"), ParseError);
  EXPECT_THROW(ingest_text("[1,2]\n"), ParseError);
  // Equal timestamps are not strictly increasing.
  EXPECT_THROW(ingest_text(good + good), ParseError);
}

TEST(Ingest, DegreesFlag) {
  IngestConfig cfg;
  cfg.degrees = true;
  cfg.target_length = 1;
  const auto r = ingest_text("{\"image_id\":\"d\",\"user_id\":\"u\",\"t\":0.5,\"lat\":45,\"lon\":-90}\n", cfg);
  const GazePoint g = unit_to_latlon(r.images.at("d").set.scanpaths[0][0]);
  EXPECT_NEAR(g.lat, kPi / 4, 1e-15);
  EXPECT_NEAR(g.lon, -kPi / 2, 1e-15);
  cfg.degrees = false;
  EXPECT_THROW(ingest_text("{\"image_id\":\"d\",\"user_id\":\"u\",\"t\":0.5,\"lat\":45,\"lon\":-90}\n", cfg), ParseError);
}

TEST(Ingest, GeneratedScanpathsReadBack) {
  std::mt19937_64 rng(2);
  ScanpathSet s;
  s.image_id = "gen";
  for (int k = 0; k < 4; ++k) s.scanpaths.push_back(oracle::random_walk(rng, 30, 0.2));
  std::ostringstream os;
  write_scanpaths(os, s);
  const IngestResult r = ingest_text(os.str());
  const ScanpathSet& back = r.images.at("gen").set;
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back.user_ids, (std::vector<std::string>{"0", "1", "2", "3"}));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 30; ++k) EXPECT_LT(spherical_distance(back.scanpaths[i][k], s.scanpaths[i][k]), 1e-12);
  // Writing what was read is canonical.
  std::ostringstream again;
  write_ingested(again, r);
  EXPECT_EQ(again.str(), os.str());
}

TEST(Report, TextAndJsonFormats) {
  std::mt19937_64 rng(3);
  ScanpathSet gt, gen;
  gt.image_id = gen.image_id = "p";
  for (int k = 0; k < 3; ++k) {
    gt.scanpaths.push_back(oracle::random_walk(rng, 30, 0.2));
    gen.scanpaths.push_back(oracle::random_walk(rng, 30, 0.2));
  }
  const MetricReport rep = report_random_baseline(gt, 4, 9, MetricConfig{});
  std::ostringstream text;
  write_report_text(text, rep);
  const std::string t = text.str();
  std::size_t last = 0;
  for (const auto& name : metric_names()) {
    const std::size_t at = t.find("\n" + name + "=");
    ASSERT_NE(at, std::string::npos) << name;
    EXPECT_GT(at, last);
    last = at;
  }
  EXPECT_NE(t.find("config.recurrence.radius=0.25\n"), std::string::npos);
  EXPECT_NE(t.find("seed=9\n"), std::string::npos);

  const auto j = to_json(rep);
  std::vector<std::string> keys;
  for (auto it = j.at("metrics").begin(); it != j.at("metrics").end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, metric_names());
  const MetricReport back = report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.image_id, "p");
  EXPECT_EQ(back.protocol, Protocol::kRandom);
  EXPECT_EQ(back.seed, 9u);
  for (const auto& name : metric_names()) EXPECT_EQ(back.mean.get(name), rep.mean.get(name)) << name;
  EXPECT_EQ(back.config.recurrence.min_line, 2);
}

TEST(Png, RoundTripAndErrors) {
  const std::string path = (std::filesystem::temp_directory_path() / "scankit_io_test.png").string();
  EquirectImage img(6, 12);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 12; ++c)
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = ((r * 12 + c) * 3 + ch) % 256 / 255.0;
  write_png(path, img);
  const EquirectImage back = read_png(path);
  EXPECT_EQ(back, img);
  std::remove(path.c_str());
  EXPECT_THROW(read_png("/nonexistent/x.png"), ImageError);
  Grid<double> heat(2, 2, 0.0);
  heat(1, 1) = 2.0;
  const EquirectImage hm = heatmap_image(heat);
  EXPECT_EQ(hm.at(1, 1, 2), 1.0);
  EXPECT_EQ(hm.at(0, 0, 0), 0.0);
}

}  // namespace
}  // namespace scankit
