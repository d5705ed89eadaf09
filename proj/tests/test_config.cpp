#include <catch_amalgamated.hpp>
#include <sstream>

#include "cfmimo/config.hpp"

using namespace cfmimo;

TEST_CASE("empty config yields all defaults") {
    std::istringstream in("");
    const auto cfg = parse_config(in);
    const SystemParams def;
    CHECK(cfg.params.num_users == def.num_users);
    CHECK(cfg.params.num_pilots == def.num_pilots);
    CHECK(cfg.params.num_aps == def.num_aps);
    CHECK(cfg.params.activity_prob == def.activity_prob);
    CHECK(cfg.params.radius == def.radius);
    CHECK(cfg.params.noise_var == def.noise_var);
}

TEST_CASE("comments, blanks and overrides") {
    std::istringstream in(
        "# geometry\n"
        "radius = 250\n"
        "\n"
        "num_users = 500  # desk run\n"
        "activity_prob = 0.2\n");
    const auto cfg = parse_config(in, {{"activity_prob", "0.05"}, {"seed", "42"}});
    CHECK(cfg.params.radius == 250.0);
    CHECK(cfg.params.num_users == 500);
    CHECK(cfg.params.activity_prob == 0.05);  // override wins over the file
    CHECK(cfg.params.seed == 42);
}

TEST_CASE("lambda at or above one half is rejected") {
    std::istringstream in("activity_prob = 0.6\n");
    CHECK_THROWS_WITH(parse_config(in), Catch::Matchers::ContainsSubstring("activity_prob"));
    std::istringstream in2("");
    CHECK_THROWS_AS(parse_config(in2, {{"activity_prob", "0.5"}}), std::invalid_argument);
}

TEST_CASE("unknown keys and malformed values are named in diagnostics") {
    std::istringstream in("pilot_count = 10\n");
    CHECK_THROWS_WITH(parse_config(in), Catch::Matchers::ContainsSubstring("pilot_count"));
    std::istringstream in2("num_users = many\n");
    CHECK_THROWS_WITH(parse_config(in2), Catch::Matchers::ContainsSubstring("num_users"));
    std::istringstream in3("radius 500\n");
    CHECK_THROWS_WITH(parse_config(in3), Catch::Matchers::ContainsSubstring("key=value"));
}

TEST_CASE("snr_db maps to the reference-distance noise variance") {
    std::istringstream in("snr_db = 30\n");
    const auto cfg = parse_config(in);
    CHECK(cfg.params.noise_var ==
          Catch::Approx(noise_var_for_snr(30.0, cfg.params.ref_dist, cfg.params.pathloss_exp))
              .epsilon(1e-14));
}

TEST_CASE("paper defaults survive a serialize/parse round trip") {
    SimConfig cfg;
    cfg.params = paper_scale_params();
    cfg.params.seed = 31337;
    cfg.trials = 123;
    const std::string text = serialize_config(cfg);
    std::istringstream in(text);
    const auto back = parse_config(in);
    CHECK(back.params.num_users == cfg.params.num_users);
    CHECK(back.params.num_pilots == cfg.params.num_pilots);
    CHECK(back.params.num_aps == cfg.params.num_aps);
    CHECK(back.params.activity_prob == cfg.params.activity_prob);
    CHECK(back.params.radius == cfg.params.radius);
    CHECK(back.params.pathloss_exp == cfg.params.pathloss_exp);
    CHECK(back.params.ref_dist == cfg.params.ref_dist);
    CHECK(back.params.noise_var == cfg.params.noise_var);
    CHECK(back.params.seed == cfg.params.seed);
    CHECK(back.trials == cfg.trials);
}
