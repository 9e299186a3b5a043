#include "convexclust/datagen.hpp"

#include "convexclust/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace convexclust {

namespace {

Vector unit_direction(CounterRng& rng, Index n) {
    Vector v(n);
    double norm2 = 0.0;
    do {
        for (Index q = 0; q < n; ++q) v(q) = rng.normal();
        norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    return v / std::sqrt(norm2);
}

void check_dimensions(const std::vector<Vector>& vectors, const char* what) {
    if (vectors.empty()) throw std::invalid_argument(std::string(what) + " must not be empty");
    for (const Vector& v : vectors) {
        if (v.size() != vectors.front().size() || v.size() == 0) {
            throw std::invalid_argument(std::string(what) + " must share a nonzero dimension");
        }
    }
}

}  // namespace

LabeledData stochastic_ball(const BallModelSpec& spec) {
    check_dimensions(spec.centers, "ball centers");
    if (spec.per_cluster < 1) throw std::invalid_argument("per_cluster must be >= 1");
    const Index n = spec.centers.front().size();
    const auto k = static_cast<Index>(spec.centers.size());
    CounterRng rng(spec.seed);
    Matrix values(k * spec.per_cluster, n);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(values.rows()));
    Index row = 0;
    for (Index c = 0; c < k; ++c) {
        for (int s = 0; s < spec.per_cluster; ++s, ++row) {
            double radius = 1.0;
            if (spec.distribution == BallDistribution::uniform_ball) {
                radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
            }
            values.row(row) = (spec.centers[c] + radius * unit_direction(rng, n)).transpose();
            labels.push_back(static_cast<int>(c));
        }
    }
    return {DataMatrix(std::move(values)), Assignment(labels)};
}

Matrix psd_sqrt(const Matrix& covariance) {
    if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
        throw std::invalid_argument("covariance must be a nonempty square matrix");
    }
    if (!covariance.allFinite()) throw std::invalid_argument("covariance has non-finite entries");
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("covariance must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (covariance + covariance.transpose()));
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
        throw std::invalid_argument("covariance must be positive semidefinite");
    }
    const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

namespace {

std::vector<Matrix> covariance_roots(const std::vector<Vector>& means,
                                     const std::vector<Matrix>& covariances) {
    check_dimensions(means, "means");
    if (covariances.size() != means.size()) {
        throw std::invalid_argument("need one covariance per mean");
    }
    std::vector<Matrix> roots;
    for (const Matrix& cov : covariances) {
        if (cov.rows() != means.front().size()) {
            throw std::invalid_argument("covariance dimension does not match means");
        }
        roots.push_back(psd_sqrt(cov));
    }
    return roots;
}

Vector draw_normal(CounterRng& rng, const Vector& mean, const Matrix& root) {
    Vector z(mean.size());
    for (Index q = 0; q < z.size(); ++q) z(q) = rng.normal();
    return mean + root * z;
}

}  // namespace

LabeledData gaussian_mixture(const GmmSpec& spec) {
    const auto roots = covariance_roots(spec.means, spec.covariances);
    if (spec.weights.size() != spec.means.size()) {
        throw std::invalid_argument("need one mixture weight per component");
    }
    double total = 0.0;
    for (double w : spec.weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("mixture weights must be >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
    if (spec.m < 1) throw std::invalid_argument("sample count must be >= 1");

    CounterRng rng(spec.seed);
    const Index n = spec.means.front().size();
    Matrix values(spec.m, n);
    std::vector<int> labels;
    for (Index row = 0; row < spec.m; ++row) {
        const double u = rng.uniform();
        std::size_t comp = 0;
        double cumulative = spec.weights[0];
        while (u >= cumulative && comp + 1 < spec.weights.size()) cumulative += spec.weights[++comp];
        values.row(row) = draw_normal(rng, spec.means[comp], roots[comp]).transpose();
        labels.push_back(static_cast<int>(comp));
    }
    return {DataMatrix(std::move(values)), Assignment(labels)};
}

LabeledData gaussian_clusters(const std::vector<Vector>& means, const std::vector<Matrix>& covariances,
                              const std::vector<int>& counts, std::uint64_t seed) {
    const auto roots = covariance_roots(means, covariances);
    if (counts.size() != means.size()) throw std::invalid_argument("need one count per mean");
    Index m = 0;
    for (int c : counts) {
        if (c < 1) throw std::invalid_argument("cluster counts must be >= 1");
        m += c;
    }
    CounterRng rng(seed);
    Matrix values(m, means.front().size());
    std::vector<int> labels;
    Index row = 0;
    for (std::size_t comp = 0; comp < means.size(); ++comp) {
        for (int s = 0; s < counts[comp]; ++s, ++row) {
            values.row(row) = draw_normal(rng, means[comp], roots[comp]).transpose();
            labels.push_back(static_cast<int>(comp));
        }
    }
    return {DataMatrix(std::move(values)), Assignment(labels)};
}

double paper_gaussians_r(double sigma) { return 0.02 * (2.0 * sigma * sigma + 5.0 * sigma); }

PaperGaussians paper_gaussians(double sigma, std::uint64_t seed) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    constexpr Index n = 100;
    const std::vector<Vector> means{Vector::Zero(n), Vector::Constant(n, 3.0),
                                    Vector::Constant(n, -3.0)};
    const Matrix cov = sigma * sigma * Matrix::Identity(n, n);
    return {gaussian_clusters(means, {cov, cov, cov}, {10, 10, 10}, seed), paper_gaussians_r(sigma)};
}

LabeledData embedded_circles(std::uint64_t seed) {
    constexpr int per_cluster = 250;
    CounterRng rng(seed);
    Matrix values(2 * per_cluster, 2);
    std::vector<int> labels(2 * per_cluster, 0);
    for (int i = 0; i < per_cluster; ++i) {
        values(i, 0) = rng.normal();
        values(i, 1) = rng.normal();
    }
    for (int i = per_cluster; i < 2 * per_cluster; ++i) {
        const double radius = 5.0 + 0.25 * rng.normal();
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        values(i, 0) = radius * std::cos(angle);
        values(i, 1) = radius * std::sin(angle);
        labels[static_cast<std::size_t>(i)] = 1;
    }
    return {DataMatrix(std::move(values)), Assignment(labels)};
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(first, last - first + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::optional<double> parse_number(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    const char* begin = cell.data();
    if (*begin == '+') ++begin;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::optional<std::size_t> parse_index(const std::string& s) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

}  // namespace

CsvData load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(split_line(line));
    }
    if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");
    if (rows.front()[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
        rows.front()[0].erase(0, 3);
    }

    const std::size_t width = rows.front().size();
    std::optional<std::size_t> label_index;
    if (label_column) label_index = parse_index(*label_column);

    bool header = false;
    for (std::size_t c = 0; c < width; ++c) {
        if (label_index && *label_index == c) continue;
        if (!parse_number(rows.front()[c])) header = true;
    }

    std::vector<std::string> names;
    if (header) {
        names = rows.front();
        rows.erase(rows.begin());
        if (label_column && !label_index) {
            const auto it = std::find(names.begin(), names.end(), *label_column);
            if (it == names.end()) {
                throw std::runtime_error(path.string() + ": no column named '" + *label_column + "'");
            }
            label_index = static_cast<std::size_t>(it - names.begin());
        }
    } else if (label_column && !label_index) {
        throw std::runtime_error(path.string() + ": label column '" + *label_column +
                                 "' given by name but the file has no header");
    }
    if (label_index && *label_index >= width) {
        throw std::runtime_error(path.string() + ": label column index out of range");
    }
    if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");

    const std::size_t features = width - (label_index ? 1 : 0);
    if (features == 0) throw std::runtime_error(path.string() + ": no feature columns");
    Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(features));
    std::vector<int> raw_labels;
    std::vector<std::string> label_names;
    std::unordered_map<std::string, int> label_ids;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        const std::size_t line_no = r + 1 + (header ? 1 : 0);
        if (cells.size() != width) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(width) + " cells, found " +
                                     std::to_string(cells.size()));
        }
        std::size_t f = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (label_index && *label_index == c) {
                auto [it, inserted] = label_ids.try_emplace(cells[c], static_cast<int>(label_ids.size()));
                if (inserted) label_names.push_back(cells[c]);
                raw_labels.push_back(it->second);
                continue;
            }
            const auto v = parse_number(cells[c]);
            if (!v) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": non-numeric feature cell '" + cells[c] + "'");
            }
            values(static_cast<Index>(r), static_cast<Index>(f++)) = *v;
        }
    }

    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < width; ++c) {
        if (label_index && *label_index == c) continue;
        feature_names.push_back(header ? names[c] : "x" + std::to_string(feature_names.size()));
    }
    CsvData out{DataMatrix(std::move(values)), std::nullopt, std::move(feature_names), {}};
    if (label_index) {
        // ids were assigned by first occurrence, so they are already canonical
        out.truth = Assignment(raw_labels);
        out.label_names = std::move(label_names);
    }
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

void save_csv(const std::filesystem::path& path, const DataMatrix& data,
              const std::optional<Assignment>& truth, const std::vector<std::string>& feature_names) {
    if (truth && static_cast<Index>(truth->size()) != data.rows()) {
        throw std::invalid_argument("label count does not match data rows");
    }
    if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != data.cols()) {
        throw std::invalid_argument("feature name count does not match data columns");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (Index q = 0; q < data.cols(); ++q) {
        if (q > 0) out << ',';
        out << (feature_names.empty() ? "x" + std::to_string(q) : feature_names[static_cast<std::size_t>(q)]);
    }
    if (truth) out << ",label";
    out << '\n';
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index q = 0; q < data.cols(); ++q) {
            if (q > 0) out << ',';
            out << format_double(data.values()(i, q));
        }
        if (truth) out << ',' << (*truth)[static_cast<std::size_t>(i)];
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace convexclust
