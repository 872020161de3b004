#include <doctest.h>

#include <iostream>

#include "oracles.hpp"

TEST_CASE("oracle suite agrees with the implementations") {
    auto summary = crpq::oracle::oracle_suite();
    for (const auto& f : summary.failures) std::cout << "oracle failure: " << f << "\n";
    CHECK(summary.failed == 0);
    CHECK(summary.passed > 1000);
    std::cout << "oracle suite: " << summary.passed << " passed, " << summary.failed
              << " failed\n";
}
