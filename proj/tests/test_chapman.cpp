#include <catch2/catch_amalgamated.hpp>

TEST_CASE("suite placeholder: test_chapman") { SUCCEED(); }
