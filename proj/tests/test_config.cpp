#include <doctest.h>

#include "mmimo/config.hpp"

using namespace mmimo;

TEST_CASE("minimal config with defaults") {
    const auto cfg = parse_config(R"({"seed": 42})");
    CHECK(cfg.seed == 42);
    CHECK(cfg.link.seed == 42);
    CHECK(cfg.topology.D == 50.0);
    CHECK(cfg.particle.dt == 1e-4);
    CHECK(cfg.link.memory == 4);
    CHECK(cfg.eta_f == 0.2);
}

TEST_CASE("seed is mandatory") {
    CHECK_THROWS_AS(parse_config(R"({})"), ConfigError);
}

TEST_CASE("unknown keys are rejected everywhere") {
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"bogus":2})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"topology":{"dd":2}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"link":{"Q9":2}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"sweep":{"step":0.1}})"), ConfigError);
}

TEST_CASE("invalid JSON and invalid values") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"link":{"Q1":0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"link":{"pi1":1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"particle":{"absorption":"magic"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed":1,"sweep":{"detectors":["psychic"]}})"),
                    ConfigError);
}

TEST_CASE("scalar-or-list topology values and cartesian expansion") {
    const auto cfg = parse_config(
        R"({"seed":1,"topology":{"d":[2,4],"h":[1,2],"r_r":[2,4]}})");
    const auto topologies = cfg.topology.expand();
    CHECK(topologies.size() == 8);
    const auto single = parse_config(R"({"seed":1,"topology":{"d":2}})");
    CHECK(single.topology.expand().size() == 1);
}

TEST_CASE("hash is stable and sensitive") {
    const auto a = parse_config(R"({"seed":1})");
    const auto b = parse_config(R"({"seed":1})");
    const auto c = parse_config(R"({"seed":2})");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
    auto d = parse_config(R"({"seed":1,"link":{"Q1":400}})");
    CHECK(a.hash() != d.hash());
}

TEST_CASE("channel mode and detector parsing") {
    const auto cfg = parse_config(
        R"({"seed":1,"link":{"channel_mode":"multinomial"},"sweep":{"detectors":["fixed","genie_zf"]}})");
    CHECK(cfg.link.channel_mode == ChannelMode::multinomial);
    REQUIRE(cfg.sweep.detectors.size() == 2);
    CHECK(cfg.sweep.detectors[1] == DetectorKind::genie_zf);
}
