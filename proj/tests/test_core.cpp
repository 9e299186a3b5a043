#include "convexclust/core.hpp"
#include "convexclust/rng.hpp"

#include <doctest.h>

#include <limits>
#include <set>

using namespace convexclust;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix random_matrix(Index m, Index n, std::uint64_t seed) {
    CounterRng rng(seed);
    Matrix x(m, n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) x(i, j) = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("data matrix rejects empty and non-finite input") {
    CHECK_THROWS_AS(DataMatrix(Matrix(0, 2)), std::invalid_argument);
    CHECK_THROWS_AS(DataMatrix(Matrix(2, 0)), std::invalid_argument);
    Matrix bad = Matrix::Zero(2, 2);
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(DataMatrix{bad}, std::invalid_argument);
    bad(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(DataMatrix{bad}, std::invalid_argument);
}

TEST_CASE("center_columns") {
    const CenteredData c = center_columns(DataMatrix(mat({{1, 2}, {3, 4}})));
    CHECK(c.centered.isApprox(mat({{-1, -1}, {1, 1}})));
    CHECK(c.column_means(0) == 2.0);
    CHECK(c.column_means(1) == 3.0);

    const CenteredData same = center_columns(DataMatrix(mat({{5, -1}, {5, -1}, {5, -1}})));
    CHECK(same.centered.isZero(0.0));

    const CenteredData four = center_columns(DataMatrix(mat({{0}, {0}, {3}, {3}})));
    CHECK(four.centered.isApprox(mat({{-1.5}, {-1.5}, {1.5}, {1.5}})));

    SUBCASE("idempotent and column sums vanish") {
        const Matrix a = random_matrix(9, 4, 3) * 10.0;
        const CenteredData once = center_columns(DataMatrix(a));
        const CenteredData twice = center_columns(DataMatrix(once.centered));
        CHECK((twice.centered - once.centered).cwiseAbs().maxCoeff() <= 1e-12 * 9 * a.cwiseAbs().maxCoeff());
        CHECK(once.centered.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12 * 9 * a.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("difference operator") {
    const Matrix d3 = Matrix(difference_operator(3));
    CHECK(d3.isApprox(mat({{1, -1, 0}, {1, 0, -1}, {0, 1, -1}})));
    const Matrix d2 = Matrix(difference_operator(2));
    CHECK(d2.isApprox(mat({{1, -1}})));
    CHECK_THROWS_AS(difference_operator(1), std::invalid_argument);

    for (Index m = 2; m <= 8; ++m) {
        const Matrix x = random_matrix(m, 3, static_cast<std::uint64_t>(m));
        const Matrix dx = difference_operator(m) * x;
        for (Index p = 0; p < pair_count(m); ++p) {
            const PairIndex ij = pair_from_row_index(p, m);
            CHECK((dx.row(p) - (x.row(ij.i) - x.row(ij.j))).norm() == doctest::Approx(0.0));
        }
        if (m >= 3) {
            const Matrix h = Matrix(difference_constraint_operator(m));
            CHECK(h.rows() == pair_count(m - 1));
            CHECK(h.cols() == pair_count(m));
            CHECK((h * dx).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("difference constraint operator annihilates exactly the range") {
    // rank(H) + rank(D) = C(m,2) and H D = 0
    for (Index m = 3; m <= 7; ++m) {
        const Matrix h = Matrix(difference_constraint_operator(m));
        const Matrix d = Matrix(difference_operator(m));
        CHECK((h * d).cwiseAbs().maxCoeff() == 0.0);
        Eigen::FullPivLU<Matrix> lu_h(h);
        Eigen::FullPivLU<Matrix> lu_d(d);
        CHECK(lu_h.rank() + lu_d.rank() == pair_count(m));
    }
}

TEST_CASE("pair index") {
    // 1-based (1,2),(2,3) at m=3 map to rows 1 and 3, i.e. 0 and 2 here.
    CHECK(pair_row_index(0, 1, 3) == 0);
    CHECK(pair_row_index(1, 2, 3) == 2);
    CHECK_THROWS_AS(pair_row_index(1, 1, 3), std::out_of_range);
    CHECK_THROWS_AS(pair_row_index(2, 1, 3), std::out_of_range);
    CHECK_THROWS_AS(pair_row_index(0, 3, 3), std::out_of_range);
    CHECK_THROWS_AS(pair_from_row_index(3, 3), std::out_of_range);

    for (Index m = 2; m <= 10; ++m) {
        std::set<Index> seen;
        Index expected = 0;
        for (Index i = 0; i < m; ++i) {
            for (Index j = i + 1; j < m; ++j) {
                const Index p = pair_row_index(i, j, m);
                CHECK(p == expected++);
                CHECK(pair_from_row_index(p, m) == PairIndex{i, j});
                seen.insert(p);
            }
        }
        CHECK(static_cast<Index>(seen.size()) == pair_count(m));
        CHECK(*seen.rbegin() == pair_count(m) - 1);
    }
}

TEST_CASE("index sets") {
    const std::vector<int> two_two{0, 0, 1, 1};
    const IndexSets s = index_sets(two_two);
    // 1-based within {1, 6}, between {2, 3, 4, 5}
    CHECK(s.within == std::vector<Index>{0, 5});
    CHECK(s.between == std::vector<Index>{1, 2, 3, 4});
    CHECK(s.between_by_pair.at({0, 1}) == std::vector<Index>{1, 2, 3, 4});
    CHECK(s.sizes == std::vector<Index>{2, 2});
    CHECK(s.blocks[1] == std::pair<Index, Index>{2, 4});

    const std::vector<int> one{0, 0, 0};
    const IndexSets single = index_sets(one);
    CHECK(single.within == std::vector<Index>{0, 1, 2});
    CHECK(single.between.empty());

    const std::vector<int> singles{0, 1, 2};
    const IndexSets three = index_sets(singles);
    CHECK(three.within.empty());
    CHECK(three.between_by_pair.size() == 3);
    for (const auto& [key, rows] : three.between_by_pair) CHECK(rows.size() == 1);

    const std::vector<int> gap{0, 1, 0};
    CHECK_THROWS_AS(index_sets(gap), std::invalid_argument);
    const std::vector<int> skip{0, 0, 2};
    CHECK_THROWS_AS(index_sets(skip), std::invalid_argument);
}

namespace {

void check_partition(const std::vector<Index>& sizes) {
    std::vector<int> labels;
    for (std::size_t k = 0; k < sizes.size(); ++k) labels.insert(labels.end(), static_cast<std::size_t>(sizes[k]), static_cast<int>(k));
    const auto m = static_cast<Index>(labels.size());
    const IndexSets s = index_sets(labels);
    std::vector<int> hits(static_cast<std::size_t>(pair_count(m)), 0);
    for (Index p : s.within) {
        const PairIndex ij = pair_from_row_index(p, m);
        REQUIRE(labels[static_cast<std::size_t>(ij.i)] == labels[static_cast<std::size_t>(ij.j)]);
        ++hits[static_cast<std::size_t>(p)];
    }
    std::vector<Index> from_pairs;
    for (const auto& [key, rows] : s.between_by_pair) {
        for (Index p : rows) {
            const PairIndex ij = pair_from_row_index(p, m);
            REQUIRE(labels[static_cast<std::size_t>(ij.i)] == key.first);
            REQUIRE(labels[static_cast<std::size_t>(ij.j)] == key.second);
            from_pairs.push_back(p);
        }
    }
    for (Index p : s.between) ++hits[static_cast<std::size_t>(p)];
    std::sort(from_pairs.begin(), from_pairs.end());
    REQUIRE(from_pairs == s.between);
    for (int h : hits) REQUIRE(h == 1);
}

void all_compositions(Index remaining, std::vector<Index>& prefix, int& count) {
    if (remaining == 0) {
        check_partition(prefix);
        ++count;
        return;
    }
    for (Index part = 1; part <= remaining; ++part) {
        prefix.push_back(part);
        all_compositions(remaining - part, prefix, count);
        prefix.pop_back();
    }
}

}  // namespace

TEST_CASE("index sets partition all pairs for every size vector up to m = 10") {
    int count = 0;
    for (Index m = 1; m <= 10; ++m) {
        std::vector<Index> prefix;
        all_compositions(m, prefix, count);
    }
    CHECK(count == 1023);  // sum over m of 2^(m-1)
}

TEST_CASE("contiguous order") {
    const std::vector<int> labels{2, 0, 2, 1, 0};
    const BlockOrder order = contiguous_order(labels);
    CHECK(order.permutation == std::vector<Index>{1, 4, 3, 0, 2});
    CHECK(order.labels == std::vector<int>{0, 0, 1, 2, 2});
    const Matrix x = mat({{0}, {1}, {2}, {3}, {4}});
    CHECK(permute_rows(x, order.permutation).isApprox(mat({{1}, {4}, {3}, {0}, {2}})));
}
