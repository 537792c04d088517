#include <doctest.h>

TEST_CASE("placeholder policy") { CHECK(true); }
