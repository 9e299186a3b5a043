#include "convexclust/core.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace convexclust {

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw std::invalid_argument("data matrix must have at least one row and one column");
    }
    if (!values_.allFinite()) {
        throw std::invalid_argument("data matrix contains non-finite entries");
    }
}

CenteredData center_columns(const DataMatrix& data) {
    CenteredData out;
    out.column_means = data.values().colwise().mean().transpose();
    out.centered = data.values().rowwise() - out.column_means.transpose();
    return out;
}

Index pair_count(Index m) noexcept { return m < 2 ? 0 : m * (m - 1) / 2; }

Index pair_row_index(Index i, Index j, Index m) {
    if (i < 0 || j <= i || j >= m) {
        throw std::out_of_range("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") invalid for m = " + std::to_string(m));
    }
    return i * m - i * (i + 1) / 2 + (j - i - 1);
}

PairIndex pair_from_row_index(Index p, Index m) {
    if (p < 0 || p >= pair_count(m)) {
        throw std::out_of_range("pair row " + std::to_string(p) + " invalid for m = " +
                                std::to_string(m));
    }
    Index i = 0;
    Index block_start = 0;
    // block i holds m - i - 1 rows
    while (p >= block_start + (m - i - 1)) {
        block_start += m - i - 1;
        ++i;
    }
    return {i, i + 1 + (p - block_start)};
}

SparseMatrix difference_operator(Index m) {
    if (m < 2) throw std::invalid_argument("difference operator needs m >= 2");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(2 * pair_count(m)));
    Index p = 0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = i + 1; j < m; ++j, ++p) {
            triplets.emplace_back(p, i, 1.0);
            triplets.emplace_back(p, j, -1.0);
        }
    }
    SparseMatrix d(pair_count(m), m);
    d.setFromTriplets(triplets.begin(), triplets.end());
    return d;
}

SparseMatrix difference_constraint_operator(Index m) {
    if (m < 3) throw std::invalid_argument("constraint operator needs m >= 3");
    const Index rows = pair_count(m - 1);
    const Index lead = m - 1;
    std::vector<Eigen::Triplet<double>> triplets;
    SparseMatrix inner = difference_operator(m - 1);
    for (Index k = 0; k < inner.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(inner, k); it; ++it) {
            triplets.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Index r = 0; r < rows; ++r) triplets.emplace_back(r, lead + r, 1.0);
    SparseMatrix h(rows, lead + rows);
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
}

IndexSets index_sets(std::span<const int> labels) {
    const auto m = static_cast<Index>(labels.size());
    if (m == 0) throw std::invalid_argument("empty label vector");

    IndexSets sets;
    int expected = 0;
    Index start = 0;
    for (Index i = 0; i <= m; ++i) {
        if (i == m || (i > 0 && labels[i] != labels[i - 1])) {
            if (labels[start] != expected) {
                throw std::invalid_argument("labels must form contiguous ascending blocks 0..K-1");
            }
            sets.blocks.emplace_back(start, i);
            sets.sizes.push_back(i - start);
            ++expected;
            start = i;
        }
    }

    for (Index i = 0; i < m; ++i) {
        for (Index j = i + 1; j < m; ++j) {
            const Index p = pair_row_index(i, j, m);
            if (labels[i] == labels[j]) {
                sets.within.push_back(p);
            } else {
                sets.between.push_back(p);
                sets.between_by_pair[{labels[i], labels[j]}].push_back(p);
            }
        }
    }
    return sets;
}

BlockOrder contiguous_order(std::span<const int> labels) {
    BlockOrder order;
    order.permutation.resize(labels.size());
    std::iota(order.permutation.begin(), order.permutation.end(), Index{0});
    std::stable_sort(order.permutation.begin(), order.permutation.end(),
                     [&](Index a, Index b) { return labels[a] < labels[b]; });
    order.labels.reserve(labels.size());
    for (Index p : order.permutation) order.labels.push_back(labels[p]);
    return order;
}

Matrix permute_rows(const Matrix& values, std::span<const Index> permutation) {
    Matrix out(static_cast<Index>(permutation.size()), values.cols());
    for (std::size_t r = 0; r < permutation.size(); ++r) {
        out.row(static_cast<Index>(r)) = values.row(permutation[r]);
    }
    return out;
}

}  // namespace convexclust
