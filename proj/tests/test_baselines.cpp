#include "convexclust/baselines.hpp"
#include "convexclust/datagen.hpp"
#include "convexclust/metrics.hpp"
#include "convexclust/rng.hpp"

#include <doctest.h>

using namespace convexclust;

namespace {

DataMatrix column(std::initializer_list<double> v) {
    Matrix m(static_cast<Index>(v.size()), 1);
    Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return DataMatrix(m);
}

}  // namespace

TEST_CASE("lloyd hand trace") {
    const DataMatrix d = column({0, 1, 10, 11});
    Matrix init(2, 1);
    init << 0, 10;
    const KMeansResult r = lloyd(d, 2, init);
    CHECK(r.labels.labels() == std::vector<int>{0, 0, 1, 1});
    CHECK(r.centers(0, 0) == 0.5);
    CHECK(r.centers(1, 0) == 10.5);
    CHECK(r.inertia == doctest::Approx(1.0));
}

TEST_CASE("lloyd limits") {
    CounterRng rng(6);
    Matrix a(7, 2);
    for (Index i = 0; i < 7; ++i) a.row(i) << rng.normal(), rng.normal();
    const DataMatrix d(a);
    const KMeansResult one = lloyd(d, 1, std::nullopt, 300, 3);
    CHECK(one.labels.k() == 1);
    CHECK((one.centers.row(0) - a.colwise().mean()).norm() <= 1e-12);

    const KMeansResult all = lloyd(d, 7, std::nullopt, 300, 3);
    CHECK(all.labels.k() == 7);
    CHECK(all.inertia == doctest::Approx(0.0));

    CHECK_THROWS_AS(lloyd(d, 8, std::nullopt), std::invalid_argument);
    CHECK_THROWS_AS(lloyd(d, 0, std::nullopt), std::invalid_argument);
}

TEST_CASE("lloyd inertia never increases and runs are reproducible") {
    const LabeledData g = embedded_circles(3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const KMeansResult r = lloyd(g.data, 4, std::nullopt, 300, seed);
        for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
            CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] + 1e-9);
        }
        const KMeansResult again = lloyd(g.data, 4, std::nullopt, 300, seed);
        CHECK(again.labels == r.labels);
        CHECK(again.inertia == r.inertia);
        // Termination: every point sits at its nearest center.
        for (Index i = 0; i < g.data.rows(); ++i) {
            Index best = 0;
            (r.centers.rowwise() - g.data.row(i)).rowwise().squaredNorm().minCoeff(&best);
            CHECK((r.centers.row(best) - g.data.row(i)).squaredNorm() ==
                  doctest::Approx((r.centers.row(r.labels[static_cast<std::size_t>(i)]) - g.data.row(i)).squaredNorm()));
        }
    }
}

TEST_CASE("lloyd repairs empty clusters") {
    const DataMatrix d = column({0, 0.1, 0.2, 50});
    Matrix init(2, 1);
    init << 0.1, 1000;  // second center attracts nothing
    const KMeansResult r = lloyd(d, 2, init);
    CHECK(r.labels.k() == 2);
    CHECK(r.labels.labels() == std::vector<int>{0, 0, 0, 1});
}

TEST_CASE("k-means++ seeding") {
    const DataMatrix two = column({0, 10});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix c = kmeanspp_init(two, 2, seed);
        CHECK(c(0, 0) != c(1, 0));
    }
    const DataMatrix dup = column({1, 1, 1, 5});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix c = kmeanspp_init(dup, 2, seed);
        CHECK(c(0, 0) != c(1, 0));
    }
    // k = 1: roughly uniform over rows
    const DataMatrix four = column({0, 1, 2, 3});
    std::vector<int> hits(4, 0);
    for (std::uint64_t seed = 0; seed < 4000; ++seed) ++hits[static_cast<std::size_t>(kmeanspp_init(four, 1, seed)(0, 0))];
    for (int h : hits) CHECK(std::abs(h - 1000) < 150);
    CHECK_THROWS_AS(kmeanspp_init(four, 5, 0), std::invalid_argument);
}

TEST_CASE("uniform init picks distinct rows") {
    const DataMatrix d = column({0, 1, 2, 3, 4, 5});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix c = uniform_init(d, 6, seed);
        std::vector<double> v(c.data(), c.data() + 6);
        std::sort(v.begin(), v.end());
        CHECK(v == std::vector<double>{0, 1, 2, 3, 4, 5});
    }
}

TEST_CASE("hierarchical clustering") {
    const DataMatrix d = column({0, 1, 10});
    CHECK(hierarchical(d, 2, Linkage::single).labels() == std::vector<int>{0, 0, 1});
    CHECK(hierarchical(d, 2, Linkage::average).labels() == std::vector<int>{0, 0, 1});
    CHECK(hierarchical(d, 3, Linkage::single).k() == 3);
    CHECK_THROWS_AS(hierarchical(d, 4, Linkage::single), std::invalid_argument);

    // Unit-gap chain: all merges tie; the lexicographic rule always merges
    // the cluster holding 0 with its right neighbour, leaving 9 alone.
    const DataMatrix chain = column({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    std::vector<int> expected(10, 0);
    expected[9] = 1;
    CHECK(hierarchical(chain, 2, Linkage::single).labels() == expected);
}

TEST_CASE("average linkage is UPGMA") {
    const DataMatrix d = column({0, 1, 4, 6.4});
    CHECK(hierarchical(d, 2, Linkage::average).labels() == std::vector<int>{0, 0, 1, 1});
    CHECK(hierarchical(d, 2, Linkage::single).labels() == std::vector<int>{0, 0, 1, 1});
    const DataMatrix e = column({0, 1, 3.2, 6});
    // single: 3.2 joins {0,1} (gap 2.2 < 2.8); average: 3.2 to {0,1} is 2.7 < 2.8
    CHECK(hierarchical(e, 2, Linkage::single).labels() == std::vector<int>{0, 0, 0, 1});
    const DataMatrix f = column({0, 1, 3.4, 6});
    // single: 2.4 < 2.6 joins left; average: 2.9 > 2.6 joins right
    CHECK(hierarchical(f, 2, Linkage::single).labels() == std::vector<int>{0, 0, 0, 1});
    CHECK(hierarchical(f, 2, Linkage::average).labels() == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("single linkage recovers separated clusters") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        BallModelSpec spec;
        Vector a(2), b(2);
        a << 0, 0;
        b << 4.5, 0;
        spec.centers = {a, b};
        spec.per_cluster = 12;
        spec.seed = seed;
        const LabeledData g = stochastic_ball(spec);
        const SeparationStats s = cluster_geometry(g.data, g.truth);
        REQUIRE(s.min_dist > s.max_dia);
        CHECK(hierarchical(g.data, 2, Linkage::single) == g.truth);
    }
}
