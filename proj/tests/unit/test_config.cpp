#include "config.hpp"
#include "doctest.h"
#include "landis/errors.hpp"

using landis::ConfigError;
using landis::cli::load_config;

namespace {

std::string message_of(const std::string& text) {
    try {
        load_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("empty config resolves every seed") {
    auto c = load_config("");
    CHECK(c.coef_seed != 0);
    CHECK(c.coef_seed != c.potential_seed);
    CHECK(load_config("").hash() == c.hash());
    CHECK(load_config("", 2).hash() != c.hash());
}

TEST_CASE("explicit seeds survive a master seed override") {
    auto c = load_config(R"({"coefficients": {"seed": 42}})", 9);
    CHECK(c.coef_seed == 42);
    CHECK(c.seed == 9);
}

TEST_CASE("syntax errors report line and column") {
    auto msg = message_of("{\n  \"grid\": {\"n\": 64,,}\n}");
    CHECK(msg.find("line 2") != std::string::npos);
}

TEST_CASE("field errors carry the dotted path") {
    CHECK(message_of(R"({"coefficients": {"lambda": 1.5}})").find("coefficients.lambda") != std::string::npos);
    CHECK(message_of(R"({"coefficients": {"sede": 3}})").find("coefficients.sede") != std::string::npos);
    CHECK(message_of(R"({"potential": {"M_list": [4, 1]}})").find("increasing") != std::string::npos);
    CHECK(message_of(R"({"potential": {"M": 0.5}})").find("at least 1") != std::string::npos);
    CHECK(message_of(R"({"grid": {"n": "big"}})").find("an integer") != std::string::npos);
    CHECK(message_of(R"({"variant": "weird"})").find("variant") != std::string::npos);
}

TEST_CASE("grid override applies before validation") {
    CHECK(load_config(R"({"grid": {"n": 64}})", {}, 128).n == 128);
    CHECK_THROWS_AS(load_config("", {}, 4), ConfigError);
}
