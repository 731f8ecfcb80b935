#include <gtest/gtest.h>

#include "urbanplan/render.hpp"

using namespace urbanplan;

TEST(GrayLevel, LinearMapping) {
  EXPECT_EQ(gray_level(0.0, 4.0), 255);
  EXPECT_EQ(gray_level(4.0, 4.0), 0);
  EXPECT_EQ(gray_level(2.0, 4.0), 128);  // round(127.5)
  EXPECT_EQ(gray_level(1.0, 4.0), 191);  // round(191.25)
  EXPECT_EQ(gray_level(3.0, 0.0), 255);
}

TEST(Heatmap, NorthIsUp) {
  LandUseConfig c(2, 2);
  c.at(1, 0, 1) = 4.0;  // northern row, western column
  c.at(0, 1, 1) = 2.0;
  const auto h = render_heatmap(c, 1);
  EXPECT_EQ(h.max_value, 4.0);
  EXPECT_EQ(h.pixels, (std::vector<std::uint8_t>{0, 255, 255, 128}));
  EXPECT_THROW(render_heatmap(c, 2), ConfigError);
  EXPECT_THROW(render_heatmap(c, -1), ConfigError);
}

TEST(Heatmap, PgmBytes) {
  LandUseConfig c(2, 1, {0, 1, 1, 0});
  const std::string bytes = pgm_bytes(render_heatmap(c, 0));
  const std::string header = "P5\n2 2\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 4);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size()]), 0);  // (1, 0)
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 1]), 255);
}

TEST(Heatmap, EmptyChannelIsWhite) {
  const auto h = render_heatmap(LandUseConfig(3, 2), 0);
  for (auto p : h.pixels) EXPECT_EQ(p, 255);
  EXPECT_EQ(heatmap_sidecar(h).at("max_value"), 0.0);
}

TEST(Summary, CsvRows) {
  LandUseConfig c(1, 2, {1, 3});
  EXPECT_EQ(render_summary(c, {"food", "shops"}), "channel,name,total,ratio\n0,food,1,0.25\n1,shops,3,0.75\n");
  EXPECT_EQ(channel_csv(c, 1), "i,j,value\n0,0,3\n");
}
