#include <doctest.h>

TEST_CASE("placeholder rft") { CHECK(true); }
