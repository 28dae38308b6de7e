#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fedvit/matrix.hpp"
#include "fedvit/rng.hpp"

using namespace fedvit;

TEST_SUITE_BEGIN("rng");

TEST_CASE("same seed gives identical streams") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 256; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("same seed gives identical matrices") {
    Rng a(99), b(99);
    const Matrix ma = rng_matrix(a, 7, 5, Distribution::StandardNormal);
    const Matrix mb = rng_matrix(b, 7, 5, Distribution::StandardNormal);
    CHECK(ma.data == mb.data);
}

TEST_CASE("distinct labels give distinct 128-value prefixes") {
    const Rng root(7);
    const char* labels[] = {"key", "data", "init", "noise", "partition"};
    std::vector<std::vector<std::uint64_t>> prefixes;
    for (const char* label : labels) {
        Rng s = root.stream(label);
        std::vector<std::uint64_t> prefix(128);
        for (auto& v : prefix) v = s.next_u64();
        prefixes.push_back(std::move(prefix));
    }
    for (std::size_t i = 0; i < prefixes.size(); ++i)
        for (std::size_t j = i + 1; j < prefixes.size(); ++j) CHECK(prefixes[i] != prefixes[j]);
}

TEST_CASE("stream derivation ignores parent consumption") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 17; ++i) b.next_u64();
    Rng sa = a.stream("child");
    Rng sb = b.stream("child");
    for (int i = 0; i < 64; ++i) CHECK(sa.next_u64() == sb.next_u64());
}

TEST_CASE("standard normal sample mean is near zero") {
    Rng rng(5);
    const Matrix m = rng_matrix(rng, 1000, 10, Distribution::StandardNormal);
    double mean = 0.0;
    for (double v : m.data) mean += v;
    mean /= static_cast<double>(m.data.size());
    CHECK(mean > -0.1);
    CHECK(mean < 0.1);
}

TEST_CASE("uniform01 entries stay in [0,1)") {
    Rng rng(6);
    const Matrix m = rng_matrix(rng, 100, 10, Distribution::Uniform01);
    for (double v : m.data) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("permutation of a singleton") {
    Rng rng(1);
    CHECK(rng_permutation(rng, 1) == std::vector<std::uint32_t>{1});
}

TEST_CASE("permutation sorted is 1..n") {
    Rng rng(2);
    for (std::size_t n : {2, 5, 16, 64}) {
        auto p = rng_permutation(rng, n);
        std::sort(p.begin(), p.end());
        for (std::size_t i = 0; i < n; ++i) CHECK(p[i] == i + 1);
    }
}

TEST_CASE("permutations of 4 elements are close to uniform") {
    Rng rng(3);
    std::map<std::vector<std::uint32_t>, int> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[rng_permutation(rng, 4)]++;
    CHECK(counts.size() == 24);
    const double expected = draws / 24.0;
    for (const auto& [perm, count] : counts) {
        CHECK(count > expected * 0.95);
        CHECK(count < expected * 1.05);
    }
}

TEST_CASE("below is bounded and hits every residue") {
    Rng rng(4);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t v = rng.below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_SUITE_END();
