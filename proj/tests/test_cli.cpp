#include "convexclust/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace convexclust;
using json = nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / ("convexclust_cli_" + name)) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("exit codes for bad input") {
    CHECK(call({}).code == cli::exit_input_error);
    CHECK(call({"nonsense"}).code == cli::exit_input_error);
    CHECK(call({"--help"}).code == cli::exit_ok);
    CHECK(call({"cluster", "/nonexistent.csv", "--c", "1"}).code == cli::exit_input_error);

    const TempDir dir("codes");
    write(dir.file("a.csv"), "x,label\n0,0\n1,0\n5,1\n");
    CHECK(call({"cluster", dir.file("a.csv")}).code == cli::exit_input_error);
    CHECK(call({"cluster", dir.file("a.csv"), "--c", "1", "--k", "2"}).code == cli::exit_input_error);
    CHECK(call({"cluster", dir.file("a.csv"), "--c", "-1"}).code == cli::exit_input_error);
    CHECK(call({"cluster", dir.file("a.csv"), "--c", "1", "--knn", "zero"}).code == cli::exit_input_error);
    CHECK(call({"bench", dir.file("a.csv"), "--methods", "magic"}).code == cli::exit_input_error);
    const Result strict = call({"cluster", dir.file("a.csv"), "--c", "0.5", "--knn", "full", "--max-iter", "2",
                                "--strict"});
    CHECK(strict.code == cli::exit_not_converged);
    CHECK(strict.err.find("did not converge") != std::string::npos);
    CHECK(call({"cluster", dir.file("a.csv"), "--c", "0.5", "--knn", "full", "--max-iter", "2"}).code == cli::exit_ok);
    CHECK(call({"cluster", dir.file("a.csv"), "--c", "0.5", "--knn", "5"}).code == cli::exit_input_error);
}

TEST_CASE("generate writes data and a spec sidecar") {
    const TempDir dir("generate");
    const std::string csv = dir.file("balls.csv");
    const Result r = call({"generate", "ball", "--centers", "0,0", "4,0", "--per-cluster", "5", "--seed", "3",
                           "-o", csv});
    REQUIRE(r.code == 0);
    const json spec = json::parse(r.out);
    CHECK(spec["delta"] == 4.0);
    CHECK(spec["ball_condition"] == true);
    CHECK(spec["seed"] == 3);
    CHECK(json::parse(slurp(csv + ".spec.json")) == spec);
    const std::string data = slurp(csv);
    CHECK(data.rfind("x0,x1,label\n", 0) == 0);
    CHECK(std::count(data.begin(), data.end(), '\n') == 11);

    const Result g = call({"generate", "paper-gaussians", "--sigma", "1", "-o", dir.file("g.csv")});
    CHECK(json::parse(g.out)["r"].get<double>() == doctest::Approx(0.14));

    const Result to_stdout = call({"generate", "circles", "--seed", "7"});
    CHECK(to_stdout.code == 0);
    CHECK(std::count(to_stdout.out.begin(), to_stdout.out.end(), '\n') == 501);
    CHECK(json::parse(to_stdout.err)["generator"] == "circles");

    CHECK(call({"generate", "ball", "--centers", "0,0", "1"}).code == cli::exit_input_error);
}

TEST_CASE("cluster at c = 0 keeps every point apart") {
    const TempDir dir("cluster0");
    write(dir.file("a.csv"), "x,y,label\n0,0,a\n1,0,a\n5,5,b\n6,5,b\n");
    const Result r = call({"cluster", dir.file("a.csv"), "--c", "0", "--knn", "full"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["cluster_count"] == 4);
    CHECK(j["assignment"] == json::array({0, 1, 2, 3}));
    CHECK(j["solver"]["converged"] == true);
    CHECK(j.contains("wall_time_s") == false);
    CHECK(json::parse(call({"cluster", dir.file("a.csv"), "--c", "0", "--knn", "full", "--timing"}).out).contains("wall_time_s"));

    const Result k = call({"cluster", dir.file("a.csv"), "--k", "2", "--knn", "full", "--r", "0.1",
                           "--labels-out", dir.file("labels.csv")});
    REQUIRE(k.code == 0);
    const json jk = json::parse(k.out);
    CHECK(jk["cluster_count"] == 2);
    CHECK(jk["rand"] == 1.0);
    CHECK(jk["selection"]["found"] == true);
    CHECK(slurp(dir.file("labels.csv")) == "row,cluster,truth\n0,0,0\n1,0,0\n2,1,1\n3,1,1\n");

    const Result a = call({"cluster", dir.file("a.csv"), "--auto-params", "--tol", "1e-7"});
    REQUIRE(a.code == 0);
    const json ja = json::parse(a.out);
    CHECK(ja["exact"] == true);
    CHECK(ja["auto_params"]["c"].get<double>() > ja["auto_params"]["kappa_lower"].get<double>());
}

TEST_CASE("path prints one row per grid point") {
    const TempDir dir("path");
    write(dir.file("a.csv"), "x,label\n0,0\n0.1,0\n10,1\n10.1,1\n");
    const Result r = call({"path", dir.file("a.csv"), "--c-grid", "0,1e6", "--r", "0.1", "--knn", "full"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header, first, second, extra;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, second);
    CHECK(header == "c,cluster_count,rand,iterations,converged");
    CHECK(first.rfind("0,4,", 0) == 0);
    CHECK(second.rfind("1000000,1,", 0) == 0);
    CHECK_FALSE(std::getline(lines, extra));

    const Result geo = call({"path", dir.file("a.csv"), "--c-min", "0.01", "--c-max", "1", "--c-count", "3",
                             "--knn", "full"});
    CHECK(std::count(geo.out.begin(), geo.out.end(), '\n') == 4);
    CHECK(call({"path", dir.file("a.csv"), "--c", "1"}).code == cli::exit_input_error);
    CHECK(call({"path", dir.file("a.csv"), "--c-grid", "1,0.5"}).code == cli::exit_input_error);
}

TEST_CASE("config file supplies defaults and flags override it") {
    const TempDir dir("config");
    write(dir.file("a.csv"), "x,label\n0,0\n1,0\n5,1\n");
    write(dir.file("run.cfg"), "# model\nc = 0\nknn = full\nmax_iter = 50\ntiming = true\nstrict = false\n");
    const Result r = call({"cluster", dir.file("a.csv"), "--config", dir.file("run.cfg")});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["config"]["c"] == 0.0);
    CHECK(j["config"]["max_iter"] == 50);
    CHECK(j.contains("wall_time_s"));
    const Result over = call({"cluster", dir.file("a.csv"), "--config", dir.file("run.cfg"), "--max-iter", "70"});
    CHECK(json::parse(over.out)["config"]["max_iter"] == 70);
}

TEST_CASE("feasibility report on the four-point instance") {
    const TempDir dir("feas");
    write(dir.file("a.csv"), "x,label\n0,0\n0,0\n3,1\n3,1\n");
    const Result r = call({"feasibility", dir.file("a.csv"), "--r", "1", "--centers", "0", "3"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["report"]["kappa_lower"] == 0.0);
    CHECK(j["report"]["kappa_upper"].get<double>() == doctest::Approx(1.5 * std::exp(9.0)));
    CHECK(j["report"]["r_min"].get<double>() == doctest::Approx(std::log(4.0) / 9.0));
    CHECK(j["report"]["feasible"] == true);
    CHECK(j["separation"]["separated"] == true);
    CHECK(j["ball"]["satisfied"] == false);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
    const TempDir dir("determinism");
    REQUIRE(call({"generate", "circles", "--seed", "2", "-o", dir.file("c.csv")}).code == 0);
    const std::vector<std::string> bench{"bench", dir.file("c.csv"), "--methods", "lloyd,kmeanspp",
                                         "--tests", "6", "--restarts", "3", "--seed", "5"};
    ::setenv("CONVEXCLUSTER_THREADS", "1", 1);
    const Result one = call(bench);
    ::setenv("CONVEXCLUSTER_THREADS", "4", 1);
    const Result four = call(bench);
    ::unsetenv("CONVEXCLUSTER_THREADS");
    REQUIRE(one.code == 0);
    CHECK(one.out == four.out);

    std::vector<std::string> other = bench;
    other.back() = "6";
    CHECK(call(other).out != one.out);

    const std::vector<std::string> cluster{"cluster", dir.file("c.csv"), "--c", "0.01", "--knn", "5"};
    CHECK(call(cluster).out == call(cluster).out);

    REQUIRE(call({"generate", "circles", "--seed", "2", "-o", dir.file("d.csv")}).code == 0);
    CHECK(slurp(dir.file("c.csv")) == slurp(dir.file("d.csv")));
}
