#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kSim = AIF_SIM_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("aif-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + kSim + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string f; std::getline(is, f, ',');) out.push_back(f);
    return out;
}

}  // namespace

TEST_CASE("posner batch writes one row per trial") {
    TempDir d;
    REQUIRE(run("posner --n 50 --seed 3 --out " + d / "out") == 0);
    auto rows = lines(slurp(d / "out/trials.csv"));
    REQUIRE(rows.size() == 201);
    CHECK(rows[0] == "experiment,cue_type,validity,ctoa,eccentricity_px,angle,seed,outcome,rt_steps");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = split(rows[i]);
        REQUIRE(f.size() >= 8);
        CHECK(f[0] == "posner");
        CHECK((f[7] == "detected" || f[7] == "timeout"));
    }
    auto sum = lines(slurp(d / "out/summary.csv"));
    CHECK(sum.size() == 5);
    CHECK(fs::exists(d / "out/manifest.txt"));
    CHECK_FALSE(fs::exists(d / "out/trace.csv"));
}

TEST_CASE("single-trial trace: free energy settles") {
    TempDir d;
    REQUIRE(run("single-trial --steps 200 --ecc 5 --angle 1.0 --out " + d / "o") == 0);
    auto rows = lines(slurp(d / "o/trace.csv"));
    REQUIRE(rows.size() == 201);
    CHECK(rows[0].rfind("step,free_energy,cue_u,cue_v,pitch,yaw,vis_u,vis_v,presence,amp,focus_u,focus_v", 0) == 0);
    std::vector<double> F;
    for (std::size_t i = 1; i < rows.size(); ++i) F.push_back(std::stod(split(rows[i])[1]));
    for (std::size_t k = 31; k < F.size(); ++k) CHECK(F[k] <= F[k - 1] + 1e-9 * std::abs(F[k - 1]));
}

TEST_CASE("bad configuration exits 1 and writes nothing") {
    TempDir d;
    std::ofstream(d / "empty.txt").close();
    std::ofstream(d / "bad.txt") << "run.n = 3\nthis is not a setting\n";
    CHECK(run("posner --config " + d / "empty.txt --out " + d / "o1") == 1);
    CHECK_FALSE(fs::exists(d / "o1/trials.csv"));
    CHECK(run("posner --config " + d / "bad.txt --out " + d / "o2") == 1);
    CHECK_FALSE(fs::exists(d / "o2/trials.csv"));
    CHECK(run("posner --set run.bogus=1 --out " + d / "o3") == 1);
    CHECK(run("posner --cue sideways --out " + d / "o4") == 1);
    CHECK(run("teleport") == 1);
    CHECK(run("single-trial --task posner --out " + d / "o5") == 1);
}

TEST_CASE("unwritable output exits 2") {
    TempDir d;
    std::ofstream(d / "file") << "x";
    CHECK(run("single-trial --steps 3 --out " + d / "file/sub") == 2);
}

TEST_CASE("output directory from the environment") {
    TempDir d;
    REQUIRE(run("single-trial --steps 3", "AIF_OUT_DIR=" + d / "env") == 0);
    CHECK(fs::exists(d / "env/trials.csv"));
    CHECK(fs::exists(d / "env/trace.csv"));
    // --out wins over the environment
    REQUIRE(run("single-trial --steps 3 --out " + d / "flag", "AIF_OUT_DIR=" + d / "env2") == 0);
    CHECK(fs::exists(d / "flag/trials.csv"));
    CHECK_FALSE(fs::exists(d / "env2"));
}

TEST_CASE("reruns are byte-identical for any worker count") {
    TempDir d;
    const std::string args = "posner --n 6 --seed 11 --ctoa 50 --set task.max_steps=300";
    REQUIRE(run(args + " --jobs 1 --out " + d / "a") == 0);
    REQUIRE(run(args + " --jobs 3 --out " + d / "b") == 0);
    REQUIRE(run(args + " --jobs 1 --out " + d / "c") == 0);
    for (const char* f : {"trials.csv", "summary.csv", "manifest.txt"}) {
        CHECK(slurp(d / "a/" + f) == slurp(d / "b/" + f));
        CHECK(slurp(d / "a/" + f) == slurp(d / "c/" + f));
    }
}

TEST_CASE("a manifest reproduces its run") {
    TempDir d;
    REQUIRE(run("reach --n 3 --seed 5 --mode bottom_up --set agent.bu_gain=12 --out " + d / "a") == 0);
    REQUIRE(run("reach --config " + d / "a/manifest.txt --out " + d / "b") == 0);
    CHECK(slurp(d / "a/trials.csv") == slurp(d / "b/trials.csv"));
    CHECK(slurp(d / "a/manifest.txt") == slurp(d / "b/manifest.txt"));
    // explicit flags override the file
    REQUIRE(run("reach --config " + d / "a/manifest.txt --n 2 --out " + d / "c") == 0);
    CHECK(lines(slurp(d / "c/trials.csv")).size() == 3);
}

TEST_CASE("scalar kernels give the same outputs") {
    TempDir d;
    const std::string args = "posner --n 3 --seed 2 --set task.max_steps=300";
    REQUIRE(run(args + " --out " + d / "v") == 0);
    REQUIRE(run(args + " --scalar --out " + d / "s") == 0);
    CHECK(slurp(d / "v/trials.csv") == slurp(d / "s/trials.csv"));
}
