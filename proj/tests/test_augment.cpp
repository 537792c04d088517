#include <doctest.h>

TEST_CASE("placeholder augment") { CHECK(true); }
