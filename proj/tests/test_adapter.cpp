#include <doctest.h>

TEST_CASE("placeholder adapter") { CHECK(true); }
