#include <doctest.h>

#include "fpp/config.hpp"

using namespace fpp;

namespace {

const char* kMinimalConfig = R"(
[geometry]
camera_width = 64
camera_height = 64

[frequencies]
periods = 1 4 16

[scenes]
count = 2
0.kind = plane
0.z0 = 0.5
0.split = train
1.kind = hemisphere
1.radius = 2.5
1.split = val

[seeds]
dataset = 11
train = 22
)";

}  // namespace

TEST_CASE("flat key = value parsing with sections") {
  const cfg::KeyValueConfig kv = cfg::KeyValueConfig::parse(
      "[a]\nx = 1\ny = hello world\n# comment\n\n[b]\nx = 2.5\n");
  CHECK(kv.get_int("a.x") == 1);
  CHECK(kv.get_string("a.y") == "hello world");
  CHECK(kv.get_double("b.x") == 2.5);
  CHECK(kv.get_int("missing.key", 9) == 9);
  CHECK_THROWS_AS(kv.get_string("missing.key"), std::invalid_argument);
  CHECK_THROWS_AS(cfg::KeyValueConfig::parse("[a\nx=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(cfg::KeyValueConfig::parse("just text\n"), std::invalid_argument);
}

TEST_CASE("parse / serialize / parse is the identity on entries") {
  const cfg::KeyValueConfig kv = cfg::KeyValueConfig::parse(kMinimalConfig);
  const cfg::KeyValueConfig again = cfg::KeyValueConfig::parse(kv.serialize());
  CHECK(kv == again);
}

TEST_CASE("RunConfig fills spec defaults and reads scenes") {
  const cfg::RunConfig c =
      cfg::RunConfig::from_kv(cfg::KeyValueConfig::parse(kMinimalConfig));
  CHECK(c.geometry.projector_width == 684);
  CHECK(c.geometry.projector_height == 608);
  CHECK(c.geometry.camera_width == 64);
  CHECK(c.geometry.period_number == 16);  // highest frequency
  CHECK(c.frequencies.periods == std::vector<int>{1, 4, 16});
  CHECK(c.n_steps == 4);
  REQUIRE(c.scenes.size() == 2);
  CHECK(c.scenes[0].kind == SceneKind::Plane);
  CHECK(c.scenes[0].params.z0 == 0.5);
  CHECK(c.scenes[1].kind == SceneKind::Hemisphere);
  CHECK(c.scenes[1].split == "val");
  CHECK(c.network.channels == std::vector<int>{8, 16, 32});
  CHECK(c.network.downsample_levels == 2);
  CHECK(c.schedule.stage1_epochs == 20);
  CHECK(c.schedule.stage1_lr == 5e-4);
  CHECK(c.schedule.stage2_lr == 1e-5);
  CHECK(c.weights.w1 == 1.0);
  CHECK(c.weights.w2 == 2.0);
  CHECK(c.weight_decay == 1e-4);
  CHECK(c.preprocess.modulation_threshold == 4.0);
  CHECK(c.preprocess.min_area_fraction == 0.01);
  CHECK(c.valid_range.first == -50.0);
  CHECK(c.valid_range.second == 50.0);
  CHECK(c.dataset_seed == 11);
  CHECK(c.train_seed == 22);
}

TEST_CASE("RunConfig round trips through to_kv") {
  const cfg::RunConfig c =
      cfg::RunConfig::from_kv(cfg::KeyValueConfig::parse(kMinimalConfig));
  const cfg::RunConfig back = cfg::RunConfig::from_kv(c.to_kv());
  const cfg::KeyValueConfig kv1 = c.to_kv();
  const cfg::KeyValueConfig kv2 = back.to_kv();
  CHECK(kv1 == kv2);
}

TEST_CASE("seeds are mandatory") {
  const char* no_seeds = "[frequencies]\nperiods = 1 4\n";
  CHECK_THROWS_AS(
      cfg::RunConfig::from_kv(cfg::KeyValueConfig::parse(no_seeds)),
      std::invalid_argument);
}

TEST_CASE("two-channel input demands a two-channel network") {
  std::string text = kMinimalConfig;
  text += "\n[train]\ntwo_channel_input = true\n";
  CHECK_THROWS_AS(cfg::RunConfig::from_kv(cfg::KeyValueConfig::parse(text)),
                  std::invalid_argument);
  text += "\n[network]\nin_channels = 2\n";
  const cfg::RunConfig c =
      cfg::RunConfig::from_kv(cfg::KeyValueConfig::parse(text));
  CHECK(c.two_channel_input);
  CHECK(c.network.in_channels == 2);
}

TEST_CASE("invalid frequency list is rejected at parse time") {
  std::string text = "[frequencies]\nperiods = 2 4\n[seeds]\ndataset = 1\ntrain = 1\n";
  CHECK_THROWS_AS(cfg::RunConfig::from_kv(cfg::KeyValueConfig::parse(text)),
                  std::invalid_argument);
}
