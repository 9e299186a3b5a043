#pragma once

// Data model shared by every module: the observation matrix, column
// centering, the complete-graph total difference operator and the
// bookkeeping that maps row pairs (i, j) to rows of that operator.
//
// All indices are 0-based. The pair (i, j), i < j, occupies row
//   p = i*m - i*(i+1)/2 + (j - i - 1)
// of the difference operator, i.e. pairs are enumerated block by block
// (0,1), (0,2), ..., (0,m-1), (1,2), ...

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace convexclust {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// m x n observation matrix, one observation per row. Always non-empty and
/// finite; the constructor throws std::invalid_argument otherwise.
class DataMatrix {
public:
    explicit DataMatrix(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    Index rows() const noexcept { return values_.rows(); }
    Index cols() const noexcept { return values_.cols(); }
    auto row(Index i) const { return values_.row(i); }

private:
    Matrix values_;
};

struct CenteredData {
    Matrix centered;
    Vector column_means;
};

/// Subtracts each column's mean. Pairwise differences, and therefore the
/// clustering produced by the convex model, are unchanged.
CenteredData center_columns(const DataMatrix& data);

/// Number of unordered pairs, m choose 2.
Index pair_count(Index m) noexcept;

struct PairIndex {
    Index i;
    Index j;
    friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

/// Row of the difference operator holding X_i - X_j. Throws
/// std::out_of_range unless 0 <= i < j < m.
Index pair_row_index(Index i, Index j, Index m);
PairIndex pair_from_row_index(Index p, Index m);

/// Sparse C(m,2) x m total difference operator; row p = e_i - e_j.
SparseMatrix difference_operator(Index m);

/// (D^{m-1}, I): annihilates exactly the range of difference_operator(m).
SparseMatrix difference_constraint_operator(Index m);

/// Partition of all pair rows into within-cluster and between-cluster sets
/// for labels laid out in contiguous blocks.
struct IndexSets {
    std::vector<Index> within;
    std::vector<Index> between;
    std::map<std::pair<int, int>, std::vector<Index>> between_by_pair;
    std::vector<Index> sizes;
    /// Half-open row ranges [first, last) per cluster.
    std::vector<std::pair<Index, Index>> blocks;
};

/// Requires labels 0..K-1 appearing in ascending contiguous blocks; throws
/// std::invalid_argument otherwise.
IndexSets index_sets(std::span<const int> labels);

/// Stable reordering that groups rows by label (ascending).
struct BlockOrder {
    /// permutation[new_row] = original row.
    std::vector<Index> permutation;
    std::vector<int> labels;
};

BlockOrder contiguous_order(std::span<const int> labels);

/// Rows of `values` taken in `permutation` order.
Matrix permute_rows(const Matrix& values, std::span<const Index> permutation);

}  // namespace convexclust
