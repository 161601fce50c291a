#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "finprep/rng.hpp"

using finprep::Rng;

TEST_CASE("deterministic given seed") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
    Rng c(43);
    bool same = true;
    Rng a2(42);
    for (int i = 0; i < 10; ++i) same = same && (a2.next_u64() == c.next_u64());
    REQUIRE_FALSE(same);
}

TEST_CASE("substreams are independent of draw order") {
    Rng base(7);
    Rng s1 = base.substream(1);
    base.next_u64();
    Rng s1_again = Rng(7).substream(1);
    REQUIRE(s1.next_u64() == s1_again.next_u64());

    Rng path_a = Rng(7).substream({3, 4});
    Rng path_b = Rng(7).substream(3).substream(4);
    REQUIRE(path_a.next_u64() == path_b.next_u64());

    REQUIRE(Rng(7).substream(1).next_u64() != Rng(7).substream(2).next_u64());
}

TEST_CASE("next_below stays in range and covers values") {
    Rng rng(123);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t v = rng.next_below(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    REQUIRE(seen.size() == 7);
    REQUIRE(rng.next_below(1) == 0);
    REQUIRE(rng.next_below(0) == 0);
}

TEST_CASE("next_double in unit interval with sane mean") {
    Rng rng(99);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double d = rng.next_double();
        REQUIRE(d >= 0.0);
        REQUIRE(d < 1.0);
        sum += d;
    }
    REQUIRE(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("shuffle is a permutation") {
    Rng rng(5);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    rng.shuffle(v);
    std::set<int> s(v.begin(), v.end());
    REQUIRE(s.size() == 10);

    Rng r1(8), r2(8);
    std::vector<int> a{1, 2, 3, 4, 5}, b{1, 2, 3, 4, 5};
    r1.shuffle(a);
    r2.shuffle(b);
    REQUIRE(a == b);
}

TEST_CASE("sample_indices draws k distinct values below n") {
    Rng rng(11);
    auto picked = rng.sample_indices(100, 10);
    REQUIRE(picked.size() == 10);
    std::set<std::size_t> s(picked.begin(), picked.end());
    REQUIRE(s.size() == 10);
    for (std::size_t i : picked) REQUIRE(i < 100);
}
