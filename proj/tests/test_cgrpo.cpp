#include <doctest.h>

TEST_CASE("placeholder cgrpo") { CHECK(true); }
