#include "doctest.h"

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "ttsa/ttsa.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Scratch directory tree removed on destruction.
class TempTree {
public:
    TempTree() {
        static int counter = 0;
        root_ = fs::temp_directory_path() / ("ttsa_capi_" + std::to_string(counter++));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    ~TempTree() { std::error_code ec; fs::remove_all(root_, ec); }

    std::string file(const std::string& name, const std::string& text) const {
        const fs::path p = root_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }
    std::string dir(const std::string& name) const { return (root_ / name).string(); }

private:
    fs::path root_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Takes ownership of a C string, freeing it through the library allocator.
std::string take(char* s) {
    REQUIRE(s != nullptr);
    std::string out(s);
    ttsa_string_free(s);
    return out;
}

ttsa_problem* make_scalar_problem() {
    const double a11 = 1.0, a12 = 0.5, a21 = 0.3, a22 = 1.0;
    const double b1 = 1.0, b2 = 0.4;
    ttsa_problem* p = nullptr;
    char* err = nullptr;
    const ttsa_status st =
        ttsa_problem_create(1, 1, &a11, &a12, &a21, &a22, &b1, &b2, &p, &err);
    REQUIRE(st == TTSA_OK);
    REQUIRE(err == nullptr);
    REQUIRE(p != nullptr);
    return p;
}

const char* kSimulateCfg = R"({
  "problem": {"a11": [[1.0]], "a12": [[0.5]], "a21": [[0.3]], "a22": [[1.0]],
              "b1": [1.0], "b2": [0.4]},
  "oracle": {"kind": "perturbation", "amps": {"b1": 0.5, "b2": 0.5}},
  "schedule": {"a_exp": 0.6, "b_exp": 0.8},
  "simulate": {"horizon": 64, "replications": 4, "trajectories": 1}
})";

}  // namespace

TEST_CASE("version string and null-safe free") {
    CHECK(std::strcmp(ttsa_version(), "0.1.0") == 0);
    ttsa_string_free(nullptr);
}

TEST_CASE("problem round trip recovers the coupled solution") {
    ttsa_problem* p = make_scalar_problem();

    double theta = 0.0, w = 0.0, delta = 0.0;
    char* err = nullptr;
    CHECK(ttsa_problem_solution(p, &theta, &w, &err) == TTSA_OK);
    CHECK(err == nullptr);
    CHECK(theta == doctest::Approx(16.0 / 17.0).epsilon(1e-12));
    CHECK(w == doctest::Approx(2.0 / 17.0).epsilon(1e-12));

    CHECK(ttsa_problem_delta(p, &delta, &err) == TTSA_OK);
    CHECK(delta == doctest::Approx(0.85).epsilon(1e-12));

    ttsa_problem_free(p);
    ttsa_problem_free(nullptr);
}

TEST_CASE("singular fast block fails with a numerical status") {
    const double a11 = 1.0, a12 = 0.5, a21 = 0.3, a22 = 0.0;
    const double b1 = 1.0, b2 = 0.4;
    ttsa_problem* p = reinterpret_cast<ttsa_problem*>(0x1);
    char* err = nullptr;
    const ttsa_status st =
        ttsa_problem_create(1, 1, &a11, &a12, &a21, &a22, &b1, &b2, &p, &err);
    CHECK(st == TTSA_NUMERICAL_ERROR);
    CHECK(p == nullptr);
    CHECK(!take(err).empty());
}

TEST_CASE("null arguments map to the config status") {
    double buf[4] = {0, 0, 0, 0};
    char* err = nullptr;

    CHECK(ttsa_problem_solution(nullptr, buf, buf + 1, &err) == TTSA_CONFIG_ERROR);
    take(err);
    err = nullptr;

    CHECK(ttsa_problem_delta(nullptr, buf, &err) == TTSA_CONFIG_ERROR);
    take(err);
    err = nullptr;

    const double a = 1.0;
    CHECK(ttsa_problem_create(1, 1, &a, &a, &a, &a, &a, &a, nullptr, &err) ==
          TTSA_CONFIG_ERROR);

    const double kernel[4] = {0.5, 0.5, 0.25, 0.75};
    CHECK(ttsa_mixing_time(2, kernel, nullptr, &err) == TTSA_CONFIG_ERROR);
    take(err);
    err = nullptr;

    CHECK(ttsa_run_command(nullptr, "cfg.json", "out", nullptr, nullptr, &err) ==
          TTSA_CONFIG_ERROR);
    take(err);
}

TEST_CASE("lyapunov certificate marshals the diagonal case") {
    const double a[4] = {1.0, 0.0, 0.0, 4.0};
    double q[4] = {-1, -1, -1, -1};
    double rate = 0.0, step = 0.0;
    char* err = nullptr;

    REQUIRE(ttsa_lyapunov_certificate(2, a, q, &rate, &step, &err) == TTSA_OK);
    CHECK(err == nullptr);
    CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q[3] == doctest::Approx(0.125).epsilon(1e-12));
    // rate = 1/(2 lmax(q)), step = rate / ||a||_q^2 with ||a||_q = 4
    CHECK(rate == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(step == doctest::Approx(1.0 / 16.0).epsilon(1e-6));

    // all out-parameters optional
    CHECK(ttsa_lyapunov_certificate(2, a, nullptr, nullptr, nullptr, &err) == TTSA_OK);

    const double unstable = -1.0;
    CHECK(ttsa_lyapunov_certificate(1, &unstable, nullptr, &rate, &step, &err) ==
          TTSA_NUMERICAL_ERROR);
    CHECK(!take(err).empty());
}

TEST_CASE("mixing time matches the pinned two-state kernels") {
    const double fast[4] = {0.5, 0.5, 0.25, 0.75};
    const double slow[4] = {0.9, 0.1, 0.2, 0.8};
    const double frozen[4] = {1.0, 0.0, 0.0, 1.0};
    int t = -1;
    char* err = nullptr;

    CHECK(ttsa_mixing_time(2, fast, &t, &err) == TTSA_OK);
    CHECK(t == 1);
    CHECK(ttsa_mixing_time(2, slow, &t, &err) == TTSA_OK);
    CHECK(t == 4);

    CHECK(ttsa_mixing_time(2, frozen, &t, &err) == TTSA_NUMERICAL_ERROR);
    CHECK(!take(err).empty());
}

TEST_CASE("run_command round trips a simulate config") {
    TempTree tree;
    const std::string cfg = tree.file("sim.json", kSimulateCfg);

    ttsa_run_options opts{};
    opts.seed = 7;
    opts.threads = 2;

    char* summary = nullptr;
    char* err = nullptr;
    REQUIRE(ttsa_run_command("simulate", cfg.c_str(), tree.dir("out").c_str(), &opts,
                             &summary, &err) == TTSA_OK);
    CHECK(err == nullptr);
    const std::string text = take(summary);

    const json parsed = json::parse(text);
    CHECK(parsed.at("command") == "simulate");
    CHECK(parsed.at("seed") == 7);
    CHECK(parsed.at("horizon") == 64);
    CHECK(slurp(fs::path(tree.dir("out")) / "summary.json") == text);

    // output bytes are a function of (config, command, seed), not threads
    opts.threads = 1;
    summary = nullptr;
    REQUIRE(ttsa_run_command("simulate", cfg.c_str(), tree.dir("out_single").c_str(), &opts,
                             &summary, &err) == TTSA_OK);
    CHECK(take(summary) == text);
}

TEST_CASE("run_command surfaces config failures and honors dry runs") {
    TempTree tree;
    char* summary = reinterpret_cast<char*>(0x1);
    char* err = nullptr;

    CHECK(ttsa_run_command("simulate", tree.dir("absent.json").c_str(),
                           tree.dir("out").c_str(), nullptr, &summary, &err) ==
          TTSA_CONFIG_ERROR);
    CHECK(summary == nullptr);
    CHECK(!take(err).empty());
    err = nullptr;

    const std::string cfg = tree.file("sim.json", kSimulateCfg);
    ttsa_run_options opts{};
    opts.seed = 3;
    opts.dry_run = 1;
    REQUIRE(ttsa_run_command("simulate", cfg.c_str(), tree.dir("never").c_str(), &opts,
                             &summary, &err) == TTSA_OK);
    const json parsed = json::parse(take(summary));
    CHECK(parsed.at("dry_run") == true);
    CHECK(!fs::exists(tree.dir("never")));
}
