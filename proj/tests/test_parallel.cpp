#include "doctest.h"

#include "xva/error.hpp"
#include "xva/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

using namespace xva;

TEST_CASE("every index is visited exactly once") {
    for (unsigned threads : {1u, 2u, 5u}) {
        std::vector<int> hits(1003, 0);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
    parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("worker exceptions reach the caller") {
    std::atomic<int> seen{0};
    CHECK_THROWS_AS(parallel_for(100, 3,
                                 [&](std::size_t i) {
                                     ++seen;
                                     if (i == 57) throw InvalidParameter("test", "boom");
                                 }),
                    InvalidParameter);
}

TEST_CASE("thread count from the environment") {
    ::setenv("XVA_THREADS", "3", 1);
    CHECK(default_thread_count() == 3);
    ::setenv("XVA_THREADS", "junk", 1);
    CHECK(default_thread_count() >= 1);
    ::unsetenv("XVA_THREADS");
    CHECK(default_thread_count() >= 1);
}
