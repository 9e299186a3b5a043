#include "convexclust/cli.hpp"

#include "convexclust/baselines.hpp"
#include "convexclust/datagen.hpp"
#include "convexclust/extraction.hpp"
#include "convexclust/metrics.hpp"
#include "convexclust/rng.hpp"
#include "convexclust/solver.hpp"
#include "convexclust/theory.hpp"
#include "convexclust/weights.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace convexclust::cli {

namespace {

using json = nlohmann::ordered_json;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("invalid number for " + what + ": '" + s + "'");
    }
}

Vector parse_vector(const std::string& s, const std::string& what) {
    const auto parts = split(s, ',');
    Vector v(static_cast<Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Index>(i)) = parse_double(parts[i], what);
    return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& part : split(s, ',')) out.push_back(parse_double(part, what));
    return out;
}

json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

json vector_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

json matrix_json(const Matrix& m) {
    json out = json::array();
    for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << text;
    if (!f) throw InputError("cannot write " + path);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        write_text(path, text);
    }
}

// ---------------------------------------------------------------- config file

const std::map<std::string, std::set<std::string>>& subcommand_tree() {
    static const std::map<std::string, std::set<std::string>> tree{
        {"", {"generate", "cluster", "path", "bench", "feasibility"}},
        {"generate", {"ball", "gmm", "circles", "paper-gaussians"}},
    };
    return tree;
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

/// Removes `--config FILE` and splices the file's key = value pairs in
/// after the subcommand names, skipping keys also given as flags.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw InputError("--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;

    std::ifstream f(path);
    if (!f) throw InputError("cannot read config file " + path);
    std::vector<std::string> tokens;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        std::replace(key.begin(), key.end(), '_', '-');
        if (key.empty()) throw InputError(path + ":" + std::to_string(line_no) + ": empty key");
        if (has_flag(args, key)) continue;
        if (value == "true") {
            tokens.push_back("--" + key);
        } else if (value == "false") {
            continue;
        } else {
            tokens.push_back("--" + key);
            std::istringstream words(value);
            for (std::string w; words >> w;) tokens.push_back(w);
        }
    }

    std::size_t pos = 0;
    std::string level;
    const auto& tree = subcommand_tree();
    while (pos < args.size()) {
        const auto it = tree.find(level);
        if (it == tree.end() || !it->second.count(args[pos])) break;
        level = args[pos++];
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), tokens.begin(), tokens.end());
    return args;
}

// ---------------------------------------------------------------- shared model options

struct ModelOptions {
    double r = 1.0;
    std::string knn = "5";
    double nu = 1.0;
    double tol = 1e-4;
    int max_iter = 10000;
    std::string merge_tol = "auto";
    std::string convention = "paper";
};

void add_model_options(CLI::App& app, ModelOptions& o) {
    app.add_option("--r", o.r, "Gaussian kernel bandwidth")->capture_default_str();
    app.add_option("--knn", o.knn, "Nearest neighbours per point, or 'full'")->capture_default_str();
    app.add_option("--nu", o.nu, "ADMM penalty")->capture_default_str();
    app.add_option("--tol", o.tol, "Stopping tolerance")->capture_default_str();
    app.add_option("--max-iter", o.max_iter, "Iteration cap per solve")->capture_default_str();
    app.add_option("--merge-tol", o.merge_tol, "Fusion distance for cluster extraction, or 'auto' (10 * tol)")
        ->capture_default_str();
    app.add_option("--convention", o.convention, "Objective convention: paper | half")->capture_default_str();
}

Knn parse_knn(const std::string& s) {
    if (s == "full") return std::nullopt;
    try {
        std::size_t used = 0;
        const int k = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return k;
    } catch (const std::exception&) {
        throw InputError("--knn expects a positive integer or 'full', got '" + s + "'");
    }
}

double resolve_merge_tol(const ModelOptions& o) {
    if (o.merge_tol == "auto") return 10.0 * o.tol;
    const double v = parse_double(o.merge_tol, "--merge-tol");
    if (!(v >= 0.0)) throw InputError("--merge-tol must be >= 0");
    return v;
}

SolverConfig solver_config(const ModelOptions& o, double c) {
    SolverConfig cfg;
    cfg.c = c;
    cfg.nu = o.nu;
    cfg.tol = o.tol;
    cfg.max_iter = o.max_iter;
    cfg.convention = parse_convention(o.convention);
    cfg.validate();
    return cfg;
}

json model_json(const ModelOptions& o, double r, const Knn& knn, double merge_tol) {
    json j;
    j["r"] = number(r);
    j["knn"] = knn ? json(*knn) : json("full");
    j["nu"] = number(o.nu);
    j["tol"] = number(o.tol);
    j["max_iter"] = o.max_iter;
    j["merge_tol"] = number(merge_tol);
    j["convention"] = std::string(to_string(parse_convention(o.convention)));
    return j;
}

// ---------------------------------------------------------------- input

struct Input {
    CsvData csv;
    json descriptor;
};

bool header_has_label(const std::string& path) {
    std::ifstream f(path);
    std::string line;
    if (!f || !std::getline(f, line)) return false;
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    for (const auto& cell : split(line, ',')) {
        if (cell == "label") return true;
    }
    return false;
}

Input load_input(const std::string& path, const std::string& label_column) {
    std::optional<std::string> column;
    if (!label_column.empty()) {
        if (label_column != "none") column = label_column;
    } else if (header_has_label(path)) {
        column = "label";
    }
    Input in{load_csv(path, column), json::object()};
    in.descriptor["path"] = path;
    in.descriptor["rows"] = in.csv.data.rows();
    in.descriptor["cols"] = in.csv.data.cols();
    in.descriptor["label_column"] = column ? json(*column) : json(nullptr);
    return in;
}

const Assignment& require_truth(const Input& in, const std::string& command) {
    if (!in.csv.truth) throw InputError(command + " needs a label column in the input");
    return *in.csv.truth;
}

void add_input_options(CLI::App& app, std::string& path, std::string& label_column) {
    app.add_option("input", path, "Input CSV")->required();
    app.add_option("--label-column", label_column,
                   "Label column name or 0-based index ('none' to disable; default: 'label' if present)");
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
    std::string output;
    std::uint64_t seed = 0;
    std::vector<std::string> centers;
    int per_cluster = 10;
    std::string distribution = "ball";
    double sigma = 1.0;
    bool paper = false;
    std::vector<std::string> means;
    std::string weights;
    int m = 30;
};

void write_generated(const LabeledData& d, json spec, const GenerateOptions& o, std::ostream& out,
                     std::ostream& err) {
    spec["rng"] = std::string(CounterRng::algorithm);
    spec["seed"] = o.seed;
    spec["rows"] = d.data.rows();
    spec["cols"] = d.data.cols();
    if (o.output.empty()) {
        const auto tmp = std::filesystem::temp_directory_path() /
                         ("convexclust-" + std::to_string(mix64(o.seed ^ 0x9e37)) + ".csv");
        save_csv(tmp, d.data, d.truth);
        std::ifstream f(tmp, std::ios::binary);
        out << f.rdbuf();
        f.close();
        std::filesystem::remove(tmp);
        err << spec.dump(2) << "\n";
        return;
    }
    save_csv(o.output, d.data, d.truth);
    spec["output"] = o.output;
    write_text(o.output + ".spec.json", spec.dump(2) + "\n");
    out << spec.dump(2) << "\n";
}

int generate_ball(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
    if (o.centers.size() < 1) throw InputError("ball needs --centers");
    BallModelSpec spec;
    for (const auto& c : o.centers) spec.centers.push_back(parse_vector(c, "--centers"));
    for (const auto& c : spec.centers) {
        if (c.size() != spec.centers.front().size()) throw InputError("centers differ in dimension");
    }
    if (o.per_cluster < 1) throw InputError("--per-cluster must be >= 1");
    spec.per_cluster = o.per_cluster;
    spec.seed = o.seed;
    if (o.distribution == "ball") {
        spec.distribution = BallDistribution::uniform_ball;
    } else if (o.distribution == "sphere") {
        spec.distribution = BallDistribution::uniform_sphere;
    } else {
        throw InputError("--distribution must be ball or sphere");
    }
    const LabeledData d = stochastic_ball(spec);
    json j;
    j["generator"] = "ball";
    j["centers"] = json::array();
    for (const auto& c : spec.centers) j["centers"].push_back(vector_json(c));
    j["per_cluster"] = spec.per_cluster;
    j["distribution"] = o.distribution;
    if (spec.centers.size() >= 2) {
        const BallCheck check = ball_condition(spec.centers);
        j["delta"] = number(check.delta);
        j["ball_condition"] = check.satisfied;
    }
    write_generated(d, std::move(j), o, out, err);
    return exit_ok;
}

int generate_paper_gaussians(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
    if (!(o.sigma > 0.0)) throw InputError("--sigma must be > 0");
    const PaperGaussians pg = paper_gaussians(o.sigma, o.seed);
    json j;
    j["generator"] = "paper-gaussians";
    j["sigma"] = number(o.sigma);
    j["r"] = number(pg.r);
    write_generated(pg.sample, std::move(j), o, out, err);
    return exit_ok;
}

int generate_gmm(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
    if (o.paper) return generate_paper_gaussians(o, out, err);
    if (o.means.empty()) throw InputError("gmm needs --means (or --paper)");
    if (!(o.sigma >= 0.0)) throw InputError("--sigma must be >= 0");
    if (o.m < 1) throw InputError("--m must be >= 1");
    GmmSpec spec;
    for (const auto& mu : o.means) spec.means.push_back(parse_vector(mu, "--means"));
    const Index n = spec.means.front().size();
    for (const auto& mu : spec.means) {
        if (mu.size() != n) throw InputError("means differ in dimension");
        spec.covariances.push_back(o.sigma * o.sigma * Matrix::Identity(n, n));
    }
    spec.weights = o.weights.empty() ? std::vector<double>(spec.means.size(), 1.0 / static_cast<double>(spec.means.size()))
                                     : parse_list(o.weights, "--weights");
    if (spec.weights.size() != spec.means.size()) throw InputError("--weights and --means differ in length");
    spec.m = o.m;
    spec.seed = o.seed;
    const LabeledData d = gaussian_mixture(spec);
    json j;
    j["generator"] = "gmm";
    j["weights"] = spec.weights;
    j["means"] = json::array();
    for (const auto& mu : spec.means) j["means"].push_back(vector_json(mu));
    j["sigma"] = number(o.sigma);
    j["m"] = o.m;
    const GmmBound bound = gmm_separation_bound(spec.means, spec.covariances, spec.m);
    j["separation_bound"] = number(bound.max_required);
    j["min_center_distance"] = number(bound.min_center_distance);
    j["bound_satisfied"] = bound.satisfied;
    write_generated(d, std::move(j), o, out, err);
    return exit_ok;
}

int generate_circles(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
    json j;
    j["generator"] = "circles";
    write_generated(embedded_circles(o.seed), std::move(j), o, out, err);
    return exit_ok;
}

// ---------------------------------------------------------------- cluster

struct ClusterOptions {
    std::string input;
    std::string label_column;
    ModelOptions model;
    std::optional<double> c;
    bool auto_params = false;
    int k = 0;
    std::string c_grid;
    int per_decade = 4;
    std::uint64_t seed = 0;
    bool strict = false;
    bool timing = false;
    std::string output;
    std::string labels_out;
};

std::vector<double> grid_from(const std::string& spec, const DataMatrix& data, const EdgeSet& edges,
                              int per_decade) {
    if (spec.empty()) return auto_c_grid(data, edges, per_decade);
    std::vector<double> grid = parse_list(spec, "--c-grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || (i > 0 && grid[i] <= grid[i - 1])) {
            throw InputError("--c-grid must be nonnegative and strictly ascending");
        }
    }
    if (grid.empty()) throw InputError("--c-grid is empty");
    return grid;
}

int cluster_command(const ClusterOptions& o, CLI::App& app, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const Input in = load_input(o.input, o.label_column);
    const DataMatrix& data = in.csv.data;

    const int modes = (o.c ? 1 : 0) + (o.auto_params ? 1 : 0) + (o.k > 0 ? 1 : 0);
    if (modes != 1) throw InputError("cluster needs exactly one of --c, --auto-params, --k");

    double r = o.model.r;
    Knn knn = parse_knn(o.model.knn);
    std::optional<ParameterChoice> choice;
    if (o.auto_params) {
        choice = suggest_parameters(data, require_truth(in, "--auto-params"));
        if (!choice) throw InputError("no feasible (r, c) found for the labelled data");
        r = choice->r;
        if (app.get_option("--knn")->count() == 0) knn = std::nullopt;
    }
    const double merge_tol = resolve_merge_tol(o.model);
    const EdgeSet edges = build_edges(data, {r, knn});

    double c = 0.0;
    SolverState state;
    json selection = nullptr;
    if (o.k > 0) {
        const auto grid = grid_from(o.c_grid, data, edges, o.per_decade);
        KSelection sel = path_select_k(data, edges, grid, solver_config(o.model, 0.0), o.k, merge_tol);
        c = sel.selected_c;
        state = std::move(sel.state);
        selection = {{"k", o.k}, {"found", sel.c.has_value()}, {"path_points", sel.path.points.size()}};
    } else {
        c = o.c ? *o.c : choice->c;
        const SolverConfig cfg = solver_config(o.model, c);
        state = AdmmSolver(data, edges, cfg.nu).solve(cfg);
    }
    const Convention convention = parse_convention(o.model.convention);
    const Assignment assignment = extract_clusters(state.x, merge_tol);

    json report;
    report["command"] = "cluster";
    report["input"] = in.descriptor;
    json config = model_json(o.model, r, knn, merge_tol);
    config["c"] = number(c);
    config["seed"] = o.seed;
    config["mode"] = o.k > 0 ? "path-select" : (o.auto_params ? "auto-params" : "fixed");
    if (o.k > 0) {
        config["c_grid"] = o.c_grid.empty() ? json("auto") : json(o.c_grid);
        config["per_decade"] = o.per_decade;
    }
    report["config"] = config;
    report["rng"] = std::string(CounterRng::algorithm);
    if (!selection.is_null()) report["selection"] = selection;
    if (choice) {
        report["auto_params"] = {{"r", number(choice->r)},
                                 {"c", number(choice->c)},
                                 {"kappa_lower", optional_number(choice->report.kappa_lower)},
                                 {"kappa_upper", optional_number(choice->report.kappa_upper)},
                                 {"r_min", optional_number(choice->report.r_min)}};
    }
    report["edges"] = edges.size();
    report["cluster_count"] = assignment.k();
    report["rand"] = in.csv.truth ? number(rand_index(assignment, *in.csv.truth)) : json(nullptr);
    if (in.csv.truth) {
        report["exact"] = exact_clustering_check(state.x, *in.csv.truth, merge_tol).exact;
    }
    report["solver"] = {{"iterations", state.iterations},
                        {"final_change", number(state.final_change)},
                        {"primal_residual", number(state.primal_residual)},
                        {"converged", state.converged},
                        {"objective", number(objective(data, state.x, edges, c, convention))}};
    report["assignment"] = assignment.labels();
    if (o.timing) {
        report["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    emit(report.dump(2) + "\n", o.output, out);

    if (!o.labels_out.empty()) {
        std::ostringstream csv;
        csv << "row,cluster";
        if (in.csv.truth) csv << ",truth";
        csv << "\n";
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            csv << i << "," << assignment[i];
            if (in.csv.truth) csv << "," << (*in.csv.truth)[i];
            csv << "\n";
        }
        write_text(o.labels_out, csv.str());
    }
    if (!state.converged) {
        err << "warning: solver did not converge in " << state.iterations << " iterations\n";
        if (o.strict) return exit_not_converged;
    }
    return exit_ok;
}

// ---------------------------------------------------------------- path

struct PathOptions {
    std::string input;
    std::string label_column;
    ModelOptions model;
    std::string c_grid;
    double c_min = 0.0;
    double c_max = 0.0;
    int c_count = 0;
    int per_decade = 4;
    bool strict = false;
    std::string output;
};

int path_command(const PathOptions& o, std::ostream& out, std::ostream& err) {
    const Input in = load_input(o.input, o.label_column);
    const DataMatrix& data = in.csv.data;
    const Knn knn = parse_knn(o.model.knn);
    const EdgeSet edges = build_edges(data, {o.model.r, knn});
    const double merge_tol = resolve_merge_tol(o.model);

    std::vector<double> grid;
    if (o.c_count > 0) {
        if (!o.c_grid.empty()) throw InputError("give either --c-grid or --c-min/--c-max/--c-count");
        if (!(o.c_min > 0.0) || !(o.c_max > o.c_min) || o.c_count < 2) {
            throw InputError("geometric grid needs 0 < c-min < c-max and c-count >= 2");
        }
        grid = geometric_grid(o.c_min, o.c_max, o.c_count);
    } else {
        grid = grid_from(o.c_grid, data, edges, o.per_decade);
    }

    const PathResult path = regularization_path(data, edges, grid, solver_config(o.model, 0.0), merge_tol);
    std::ostringstream csv;
    csv.precision(17);
    csv << "c,cluster_count,rand,iterations,converged\n";
    bool all_converged = true;
    for (const PathPoint& p : path.points) {
        csv << p.c << "," << p.cluster_count << ",";
        if (in.csv.truth) csv << rand_index(p.assignment, *in.csv.truth);
        csv << "," << p.iterations << "," << (p.converged ? 1 : 0) << "\n";
        all_converged = all_converged && p.converged;
    }
    emit(csv.str(), o.output, out);
    if (!all_converged) {
        err << "warning: some path points did not converge\n";
        if (o.strict) return exit_not_converged;
    }
    return exit_ok;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
    std::string input;
    std::string label_column;
    ModelOptions model;
    std::string methods = "convex,lloyd,kmeanspp,hc-single,hc-average";
    int tests = 100;
    int restarts = 10;
    std::uint64_t seed = 0;
    std::string c_grid;
    int per_decade = 4;
    std::string format = "json";
    std::string output;
};

unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CONVEXCLUSTER_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
        } catch (const std::exception&) {
            throw InputError("CONVEXCLUSTER_THREADS must be a positive integer");
        }
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

template <typename Job>
void parallel_for(std::size_t jobs, Job job) {
    const unsigned workers = worker_count(jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct MethodSummary {
    std::string method;
    std::vector<double> rand;
};

bool constant(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

double mean_of(const std::vector<double>& v) {
    if (!v.empty() && constant(v)) return v.front();
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2 || constant(v)) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

int bench_command(const BenchOptions& o, std::ostream& out) {
    const Input in = load_input(o.input, o.label_column);
    const DataMatrix& data = in.csv.data;
    const Assignment& truth = require_truth(in, "bench");
    const int k = truth.k();
    if (o.tests < 1 || o.restarts < 1) throw InputError("--tests and --restarts must be >= 1");
    if (o.format != "json" && o.format != "csv") throw InputError("--format must be json or csv");

    const std::set<std::string> known{"convex", "lloyd", "kmeanspp", "hc-single", "hc-average"};
    std::vector<std::string> methods = split(o.methods, ',');
    for (const auto& m : methods) {
        if (!known.count(m)) throw InputError("unknown method '" + m + "'");
    }

    const Knn knn = parse_knn(o.model.knn);
    const double merge_tol = resolve_merge_tol(o.model);
    std::vector<MethodSummary> results;
    json convex_info = nullptr;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const std::string& method = methods[mi];
        MethodSummary summary{method, std::vector<double>(static_cast<std::size_t>(o.tests), 0.0)};
        if (method == "convex") {
            // Deterministic: one solve stands for every test.
            const EdgeSet edges = build_edges(data, {o.model.r, knn});
            const auto grid = grid_from(o.c_grid, data, edges, o.per_decade);
            const KSelection sel =
                path_select_k(data, edges, grid, solver_config(o.model, 0.0), k, merge_tol);
            std::fill(summary.rand.begin(), summary.rand.end(), rand_index(sel.assignment, truth));
            convex_info = {{"c", optional_number(sel.c)}, {"cluster_count", sel.assignment.k()}};
        } else if (method == "hc-single" || method == "hc-average") {
            const Linkage linkage = method == "hc-single" ? Linkage::single : Linkage::average;
            std::fill(summary.rand.begin(), summary.rand.end(),
                      rand_index(hierarchical(data, k, linkage), truth));
        } else {
            const bool plus = method == "kmeanspp";
            parallel_for(static_cast<std::size_t>(o.tests), [&](std::size_t t) {
                double best = 0.0;
                for (int rs = 0; rs < o.restarts; ++rs) {
                    const std::uint64_t s = derive_seed(o.seed, static_cast<std::uint64_t>(mi), t,
                                                        static_cast<std::uint64_t>(rs));
                    const Matrix init = plus ? kmeanspp_init(data, k, s) : uniform_init(data, k, s);
                    best = std::max(best, rand_index(lloyd(data, k, init).labels, truth));
                }
                summary.rand[t] = best;
            });
        }
        results.push_back(std::move(summary));
    }

    if (o.format == "csv") {
        std::ostringstream csv;
        csv.precision(17);
        csv << "method,mean_rand,sd_rand,min_rand,max_rand,tests,restarts\n";
        for (const auto& r : results) {
            csv << r.method << "," << mean_of(r.rand) << "," << sd_of(r.rand) << ","
                << *std::min_element(r.rand.begin(), r.rand.end()) << ","
                << *std::max_element(r.rand.begin(), r.rand.end()) << "," << o.tests << "," << o.restarts
                << "\n";
        }
        emit(csv.str(), o.output, out);
        return exit_ok;
    }
    json report;
    report["command"] = "bench";
    report["input"] = in.descriptor;
    json config = model_json(o.model, o.model.r, knn, merge_tol);
    config["methods"] = methods;
    config["k"] = k;
    config["tests"] = o.tests;
    config["restarts"] = o.restarts;
    config["seed"] = o.seed;
    config["c_grid"] = o.c_grid.empty() ? json("auto") : json(o.c_grid);
    config["per_decade"] = o.per_decade;
    report["config"] = config;
    report["rng"] = std::string(CounterRng::algorithm);
    report["results"] = json::array();
    for (const auto& r : results) {
        json row{{"method", r.method},
                 {"mean_rand", number(mean_of(r.rand))},
                 {"sd_rand", number(sd_of(r.rand))},
                 {"min_rand", number(*std::min_element(r.rand.begin(), r.rand.end()))},
                 {"max_rand", number(*std::max_element(r.rand.begin(), r.rand.end()))}};
        if (r.method == "convex") row["selection"] = convex_info;
        report["results"].push_back(row);
    }
    emit(report.dump(2) + "\n", o.output, out);
    return exit_ok;
}

// ---------------------------------------------------------------- feasibility

struct FeasibilityOptions {
    std::string input;
    std::string label_column;
    std::optional<double> r;
    std::vector<std::string> centers;
    std::optional<double> gmm_sigma;
    std::string output;
};

json report_json(const FeasibilityReport& f) {
    json j;
    j["r"] = number(f.r);
    j["clusters"] = f.clusters;
    j["sizes"] = f.sizes;
    j["d"] = number(f.d);
    j["d_min"] = number(f.d_min);
    j["diameters"] = vector_json(f.diameters);
    j["r_min"] = optional_number(f.r_min);
    j["r_min_using_min_dist"] = optional_number(f.r_min_using_min_dist);
    j["tau"] = matrix_json(f.tau);
    j["tau_pairs"] = f.tau_pairs;
    j["zero_tau_dims"] = f.zero_tau_dims;
    if (f.clusters == 2) j["rho"] = number(f.rho);
    j["epsilon"] = vector_json(f.epsilon);
    j["gamma_max_between"] = number(f.gamma_max_between);
    j["gamma_min_within"] = number(f.gamma_min_within);
    j["kappa_lower"] = optional_number(f.kappa_lower);
    j["kappa_upper"] = optional_number(f.kappa_upper);
    j["degenerate"] = f.degenerate;
    j["feasible"] = f.feasible;
    j["notes"] = f.notes;
    return j;
}

int feasibility_command(const FeasibilityOptions& o, std::ostream& out) {
    const Input in = load_input(o.input, o.label_column);
    const DataMatrix& data = in.csv.data;
    const Assignment& truth = require_truth(in, "feasibility");
    if (truth.k() < 2) throw InputError("feasibility needs at least two clusters");

    json report;
    report["command"] = "feasibility";
    report["input"] = in.descriptor;
    const SeparationCheck sep = separation_check(data, truth);
    report["separation"] = {{"separated", sep.separated},
                            {"min_dist", number(sep.stats.min_dist)},
                            {"max_dist", number(sep.stats.max_dist)},
                            {"max_dia", number(sep.stats.max_dia)},
                            {"means_distinct", sep.means_distinct},
                            {"coincident_mean_dims", sep.coincident_mean_dims}};
    if (truth.k() == 2) report["separation"]["zhu_condition"] = zhu_condition(data, truth);

    if (o.r) {
        report["report"] = report_json(feasibility(data, truth, *o.r));
    } else if (const auto choice = suggest_parameters(data, truth)) {
        report["suggested"] = {{"r", number(choice->r)}, {"c", number(choice->c)}};
        report["report"] = report_json(choice->report);
    } else {
        report["suggested"] = nullptr;
        report["report"] = report_json(feasibility(data, truth, 1.0));
    }

    if (!o.centers.empty()) {
        std::vector<Vector> centers;
        for (const auto& c : o.centers) centers.push_back(parse_vector(c, "--centers"));
        if (centers.size() < 2) throw InputError("--centers needs at least two centers");
        const BallCheck ball = ball_condition(centers);
        report["ball"] = {{"delta", number(ball.delta)}, {"satisfied", ball.satisfied}};
    }
    if (o.gmm_sigma) {
        if (!(*o.gmm_sigma >= 0.0)) throw InputError("--gmm-sigma must be >= 0");
        std::vector<Vector> means(static_cast<std::size_t>(truth.k()), Vector::Zero(data.cols()));
        const auto sizes = truth.cluster_sizes();
        for (Index i = 0; i < data.rows(); ++i) means[static_cast<std::size_t>(truth[static_cast<std::size_t>(i)])] += data.row(i).transpose();
        for (std::size_t s = 0; s < means.size(); ++s) means[s] /= static_cast<double>(sizes[s]);
        const std::vector<Matrix> covs(means.size(), (*o.gmm_sigma) * (*o.gmm_sigma) *
                                                         Matrix::Identity(data.cols(), data.cols()));
        const GmmBound bound = gmm_separation_bound(means, covs, data.rows());
        report["gmm"] = {{"sigma", number(*o.gmm_sigma)},
                         {"means", "empirical cluster means"},
                         {"required", number(bound.max_required)},
                         {"min_center_distance", number(bound.min_center_distance)},
                         {"satisfied", bound.satisfied}};
    }
    emit(report.dump(2) + "\n", o.output, out);
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weighted sum-of-l1 convex clustering"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");
    app.add_option("--config", "Flat key = value file mirroring the long flags (flags win)");

    GenerateOptions gen;
    CLI::App* generate = app.add_subcommand("generate", "Write a synthetic labelled dataset");
    generate->require_subcommand(1);
    auto add_gen_common = [&](CLI::App* sub) {
        sub->add_option("-o,--output", gen.output, "Output CSV (sidecar <output>.spec.json)");
        sub->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    };
    CLI::App* ball = generate->add_subcommand("ball", "Uniform unit balls around given centers");
    add_gen_common(ball);
    ball->add_option("--centers", gen.centers, "Centers as comma lists, e.g. 0,0 4,0")->required();
    ball->add_option("--per-cluster", gen.per_cluster, "Points per center")->capture_default_str();
    ball->add_option("--distribution", gen.distribution, "ball | sphere")->capture_default_str();
    CLI::App* gmm = generate->add_subcommand("gmm", "Gaussian mixture with spherical covariance");
    add_gen_common(gmm);
    gmm->add_flag("--paper", gen.paper, "Three 10-point clusters in R^100 at 0, 3*1, -3*1");
    gmm->add_option("--sigma", gen.sigma, "Component standard deviation")->capture_default_str();
    gmm->add_option("--means", gen.means, "Component means as comma lists");
    gmm->add_option("--weights", gen.weights, "Mixture weights, comma separated (default uniform)");
    gmm->add_option("--m", gen.m, "Sample count")->capture_default_str();
    CLI::App* circles = generate->add_subcommand("circles", "Gaussian blob inside a noisy ring");
    add_gen_common(circles);
    CLI::App* pgauss = generate->add_subcommand("paper-gaussians", "Same as gmm --paper");
    add_gen_common(pgauss);
    pgauss->add_option("--sigma", gen.sigma, "Component standard deviation")->capture_default_str();

    ClusterOptions co;
    CLI::App* cluster = app.add_subcommand("cluster", "Run the convex model on a CSV");
    add_input_options(*cluster, co.input, co.label_column);
    add_model_options(*cluster, co.model);
    cluster->add_option("--c", co.c, "Regularization weight");
    cluster->add_flag("--auto-params", co.auto_params, "Pick (r, c) from the feasibility interval (needs labels)");
    cluster->add_option("--k", co.k, "Select c on the regularization path to give k clusters");
    cluster->add_option("--c-grid", co.c_grid, "Grid for --k, comma separated (default: automatic)");
    cluster->add_option("--per-decade", co.per_decade, "Automatic grid density")->capture_default_str();
    cluster->add_option("--seed", co.seed, "Recorded in the report")->capture_default_str();
    cluster->add_flag("--strict", co.strict, "Exit with code 3 if the solver does not converge");
    cluster->add_flag("--timing", co.timing, "Include wall time in the report");
    cluster->add_option("-o,--output", co.output, "Report file (default stdout)");
    cluster->add_option("--labels-out", co.labels_out, "Per-point cluster CSV");

    PathOptions po;
    CLI::App* path = app.add_subcommand("path", "Regularization path over a c grid");
    add_input_options(*path, po.input, po.label_column);
    add_model_options(*path, po.model);
    path->add_option("--c-grid", po.c_grid, "Comma separated ascending grid");
    path->add_option("--c-min", po.c_min, "Geometric grid start");
    path->add_option("--c-max", po.c_max, "Geometric grid end");
    path->add_option("--c-count", po.c_count, "Geometric grid size");
    path->add_option("--per-decade", po.per_decade, "Automatic grid density")->capture_default_str();
    path->add_flag("--strict", po.strict, "Exit with code 3 if any point does not converge");
    path->add_option("-o,--output", po.output, "CSV file (default stdout)");

    BenchOptions bo;
    CLI::App* bench = app.add_subcommand("bench", "Compare the convex model with baselines");
    add_input_options(*bench, bo.input, bo.label_column);
    add_model_options(*bench, bo.model);
    bench->add_option("--methods", bo.methods, "Comma separated subset of convex,lloyd,kmeanspp,hc-single,hc-average")
        ->capture_default_str();
    bench->add_option("--tests", bo.tests, "Number of tests")->capture_default_str();
    bench->add_option("--restarts", bo.restarts, "Initializations per test (best Rand kept)")->capture_default_str();
    bench->add_option("--seed", bo.seed, "Random seed")->capture_default_str();
    bench->add_option("--c-grid", bo.c_grid, "Grid for the convex path (default: automatic)");
    bench->add_option("--per-decade", bo.per_decade, "Automatic grid density")->capture_default_str();
    bench->add_option("--format", bo.format, "json | csv")->capture_default_str();
    bench->add_option("-o,--output", bo.output, "Output file (default stdout)");

    FeasibilityOptions fo;
    CLI::App* feas = app.add_subcommand("feasibility", "Exact-recovery conditions for a labelled CSV");
    add_input_options(*feas, fo.input, fo.label_column);
    feas->add_option("--r", fo.r, "Kernel bandwidth (default: suggested)");
    feas->add_option("--centers", fo.centers, "Ball centers for the center-distance condition");
    feas->add_option("--gmm-sigma", fo.gmm_sigma, "Spherical sigma for the mixture separation bound");
    feas->add_option("-o,--output", fo.output, "Report file (default stdout)");

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }

    try {
        if (*ball) return generate_ball(gen, out, err);
        if (*gmm) return generate_gmm(gen, out, err);
        if (*circles) return generate_circles(gen, out, err);
        if (*pgauss) return generate_paper_gaussians(gen, out, err);
        if (*cluster) return cluster_command(co, *cluster, out, err);
        if (*path) return path_command(po, out, err);
        if (*bench) return bench_command(bo, out);
        if (*feas) return feasibility_command(fo, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }
    return exit_input_error;
}

}  // namespace convexclust::cli
