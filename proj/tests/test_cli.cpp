#include <catch2/catch_amalgamated.hpp>
#include "opderiv/opderiv.hpp"

TEST_CASE("placeholder test_cli") { CHECK(true); }
