#include "convexclust/datagen.hpp"
#include "convexclust/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace convexclust;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name, const std::string& contents = {})
        : path(std::filesystem::temp_directory_path() / ("convexclust_test_" + name)) {
        if (!contents.empty()) std::ofstream(path) << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("stochastic ball support and separation") {
    BallModelSpec spec;
    spec.centers = {vec({0, 0}), vec({4.5, 0}), vec({0, 4.5})};
    spec.per_cluster = 200;
    spec.seed = 11;
    const LabeledData g = stochastic_ball(spec);
    CHECK(g.data.rows() == 600);
    for (Index i = 0; i < g.data.rows(); ++i) {
        const int c = g.truth[static_cast<std::size_t>(i)];
        CHECK((g.data.values().row(i).transpose() - spec.centers[static_cast<std::size_t>(c)]).norm() <= 1.0);
    }
    const SeparationStats s = cluster_geometry(g.data, g.truth);
    CHECK(s.min_dist >= 4.5 - 2.0);
    CHECK(s.max_dia <= 2.0);

    spec.distribution = BallDistribution::uniform_sphere;
    const LabeledData sphere = stochastic_ball(spec);
    for (Index i = 0; i < sphere.data.rows(); ++i) {
        const int c = sphere.truth[static_cast<std::size_t>(i)];
        CHECK((sphere.data.values().row(i).transpose() - spec.centers[static_cast<std::size_t>(c)]).norm() ==
              doctest::Approx(1.0));
    }
}

TEST_CASE("stochastic ball is centered on average") {
    BallModelSpec spec;
    spec.centers = {vec({2, -1, 0.5})};
    spec.per_cluster = 100000;
    spec.seed = 5;
    const LabeledData g = stochastic_ball(spec);
    const Vector mean = g.data.values().colwise().mean().transpose();
    CHECK((mean - spec.centers[0]).cwiseAbs().maxCoeff() <= 0.02);
    CHECK_THROWS_AS(stochastic_ball(BallModelSpec{}), std::invalid_argument);
}

TEST_CASE("gaussian mixture") {
    GmmSpec spec;
    spec.weights = {0.3, 0.7};
    spec.means = {vec({0, 0}), vec({10, -10})};
    spec.covariances = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
    spec.m = 50;
    spec.seed = 1;
    const LabeledData exact = gaussian_mixture(spec);
    for (Index i = 0; i < 50; ++i) {
        const Vector row = exact.data.values().row(i).transpose();
        CHECK((row == spec.means[0] || row == spec.means[1]));
        const Vector first = exact.data.values().row(0).transpose();
        CHECK((row == first) == (exact.truth[static_cast<std::size_t>(i)] == 0));
    }

    Matrix cov(2, 2);
    cov << 2.0, 0.6, 0.6, 1.0;
    spec.covariances = {cov, cov};
    spec.weights = {0.25, 0.75};
    spec.m = 40000;
    const LabeledData g = gaussian_mixture(spec);
    std::vector<Index> rows[2];
    for (Index i = 0; i < g.data.rows(); ++i) {
        const int c = (g.data.values()(i, 0) > 5.0) ? 1 : 0;
        rows[c].push_back(i);
    }
    const double n0 = static_cast<double>(rows[0].size());
    // binomial(40000, 0.25): sd about 87
    CHECK(std::abs(n0 - 10000.0) < 450.0);
    for (int c = 0; c < 2; ++c) {
        Matrix x(static_cast<Index>(rows[c].size()), 2);
        for (std::size_t k = 0; k < rows[c].size(); ++k) x.row(static_cast<Index>(k)) = g.data.values().row(rows[c][k]);
        const Vector mean = x.colwise().mean().transpose();
        const Matrix centered = x.rowwise() - mean.transpose();
        const Matrix sample = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
        CHECK((mean - spec.means[static_cast<std::size_t>(c)]).cwiseAbs().maxCoeff() <= 0.06);
        CHECK((sample - cov).cwiseAbs().maxCoeff() <= 0.1);
    }

    spec.weights = {0.5, 0.6};
    CHECK_THROWS_AS(gaussian_mixture(spec), std::invalid_argument);
    Matrix bad(2, 2);
    bad << 1, 0, 0, -1;
    CHECK_THROWS_AS(psd_sqrt(bad), std::invalid_argument);
    const Matrix root = psd_sqrt(cov);
    CHECK((root * root - cov).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("three gaussian clusters in R^100") {
    const PaperGaussians p = paper_gaussians(1.0, 3);
    CHECK(p.r == doctest::Approx(0.14));
    CHECK(paper_gaussians_r(2.0) == doctest::Approx(0.36));
    CHECK(p.sample.data.rows() == 30);
    CHECK(p.sample.data.cols() == 100);
    CHECK(p.sample.truth.cluster_sizes() == std::vector<Index>{10, 10, 10});
    CHECK(p.sample.data.values().row(10).mean() == doctest::Approx(3.0).epsilon(0.1));
    CHECK(p.sample.data.values().row(20).mean() == doctest::Approx(-3.0).epsilon(0.1));
    CHECK_THROWS_AS(paper_gaussians(0.0, 1), std::invalid_argument);
}

TEST_CASE("embedded circles") {
    const LabeledData g = embedded_circles(7);
    CHECK(g.data.rows() == 500);
    CHECK(g.data.cols() == 2);
    CHECK(g.truth.cluster_sizes() == std::vector<Index>{250, 250});
    double radius = 0.0;
    for (Index i = 250; i < 500; ++i) {
        const double r = g.data.values().row(i).norm();
        CHECK(r > 3.5);
        radius += r / 250.0;
    }
    CHECK(std::abs(radius - 5.0) <= 0.05);
}

TEST_CASE("generators are deterministic") {
    CHECK(embedded_circles(4).data.values() == embedded_circles(4).data.values());
    CHECK(embedded_circles(4).data.values() != embedded_circles(5).data.values());
    CHECK(paper_gaussians(1.0, 9).sample.data.values() == paper_gaussians(1.0, 9).sample.data.values());
    BallModelSpec spec;
    spec.centers = {vec({0, 0}), vec({5, 0})};
    spec.per_cluster = 10;
    spec.seed = 2;
    CHECK(stochastic_ball(spec).data.values() == stochastic_ball(spec).data.values());
    GmmSpec gmm;
    gmm.weights = {0.5, 0.5};
    gmm.means = spec.centers;
    gmm.covariances = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    gmm.m = 20;
    gmm.seed = 8;
    CHECK(gaussian_mixture(gmm).data.values() == gaussian_mixture(gmm).data.values());
    CHECK(gaussian_mixture(gmm).truth == gaussian_mixture(gmm).truth);
}

TEST_CASE("csv loading") {
    const TempFile plain("plain.csv", "1,2\n3,4\n5,6\n");
    const CsvData a = load_csv(plain.path);
    CHECK(a.data.rows() == 3);
    CHECK(a.data.cols() == 2);
    CHECK(a.data.values()(2, 1) == 6.0);
    CHECK_FALSE(a.truth.has_value());

    const TempFile labeled("labeled.csv", "x,y,class\n0,0,b\n1,1,a\n2,2,b\n");
    const CsvData b = load_csv(labeled.path, std::string("class"));
    CHECK(b.data.cols() == 2);
    REQUIRE(b.truth.has_value());
    CHECK(b.truth->labels() == std::vector<int>{0, 1, 0});
    CHECK(b.label_names == std::vector<std::string>{"b", "a"});
    CHECK(b.feature_names == std::vector<std::string>{"x", "y"});
    const CsvData by_index = load_csv(labeled.path, std::string("2"));
    CHECK(by_index.truth == b.truth);

    const TempFile ragged("ragged.csv", "1,2\n3\n");
    CHECK_THROWS_AS(load_csv(ragged.path), std::runtime_error);
    const TempFile text("text.csv", "a,b\n1,x\n");
    CHECK_THROWS_AS(load_csv(text.path), std::runtime_error);
    CHECK_THROWS_AS(load_csv(labeled.path, std::string("missing")), std::runtime_error);
    CHECK_THROWS_AS(load_csv(std::filesystem::path("/nonexistent/none.csv")), std::runtime_error);
}

TEST_CASE("csv round trip is exact") {
    const LabeledData g = embedded_circles(1);
    const TempFile out("roundtrip.csv");
    save_csv(out.path, g.data, g.truth);
    const CsvData back = load_csv(out.path, std::string("label"));
    CHECK(back.data.values() == g.data.values());
    CHECK(back.truth == g.truth);
}
