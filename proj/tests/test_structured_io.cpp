#include <doctest.h>

TEST_CASE("placeholder structured_io") { CHECK(true); }
