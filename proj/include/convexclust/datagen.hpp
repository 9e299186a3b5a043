#pragma once

// Synthetic generators for the experiment configurations and CSV I/O.

#include "convexclust/core.hpp"
#include "convexclust/extraction.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace convexclust {

struct LabeledData {
    DataMatrix data;
    Assignment truth;
};

enum class BallDistribution { uniform_ball, uniform_sphere };

struct BallModelSpec {
    std::vector<Vector> centers;
    int per_cluster = 1;
    BallDistribution distribution = BallDistribution::uniform_ball;
    std::uint64_t seed = 0;
};

/// per_cluster points around each center, rows grouped by cluster.
LabeledData stochastic_ball(const BallModelSpec& spec);

struct GmmSpec {
    std::vector<double> weights;
    std::vector<Vector> means;
    std::vector<Matrix> covariances;
    int m = 0;
    std::uint64_t seed = 0;
};

/// Component drawn per sample from `weights`; rows in draw order.
LabeledData gaussian_mixture(const GmmSpec& spec);

/// Exactly counts[i] draws from N(means[i], covariances[i]), grouped.
LabeledData gaussian_clusters(const std::vector<Vector>& means, const std::vector<Matrix>& covariances,
                              const std::vector<int>& counts, std::uint64_t seed);

/// Symmetric square root of a PSD matrix; throws std::invalid_argument when
/// the matrix is not symmetric PSD (up to a relative 1e-10 tolerance).
Matrix psd_sqrt(const Matrix& covariance);

struct PaperGaussians {
    LabeledData sample;
    double r;  ///< recommended kernel bandwidth 0.02 (2 sigma^2 + 5 sigma)
};

/// Three 10-point clusters in R^100 around 0, 3*1 and -3*1 with covariance
/// sigma^2 I.
PaperGaussians paper_gaussians(double sigma, std::uint64_t seed);
double paper_gaussians_r(double sigma);

/// 250 points from N(0, I_2) inside a ring of 250 points with radius
/// N(5, 0.25^2) and uniform angle.
LabeledData embedded_circles(std::uint64_t seed);

struct CsvData {
    DataMatrix data;
    std::optional<Assignment> truth;
    std::vector<std::string> feature_names;
    /// Original label strings, indexed by canonical label id.
    std::vector<std::string> label_names;
};

/// Comma-separated numeric table; a first row with any non-numeric cell is
/// a header. label_column names a header column, or a 0-based column index
/// when there is no header. Throws std::runtime_error on malformed input.
CsvData load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column = std::nullopt);

/// Writes shortest round-trip decimal representations. Adds a trailing
/// "label" column when truth is given.
void save_csv(const std::filesystem::path& path, const DataMatrix& data,
              const std::optional<Assignment>& truth = std::nullopt,
              const std::vector<std::string>& feature_names = {});

}  // namespace convexclust
