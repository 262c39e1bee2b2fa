#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string(SEMIDIFF_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("semidiff_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    CHECK(cli("run --config " + (dir / "missing.json").string()) == 3);

    std::ofstream(dir / "bad.json") << R"({"mode": "axioms", "axioms": {"k": 0}})";
    CHECK(cli("run --config " + (dir / "bad.json").string()) == 2);
    std::ofstream(dir / "typo.json") << R"({"mode": "axioms", "axiom": {}})";
    CHECK(cli("run --config " + (dir / "typo.json").string()) == 2);
    std::ofstream(dir / "garbage.json") << "{ not json";
    CHECK(cli("run --config " + (dir / "garbage.json").string()) == 2);

    const std::string smoke = std::string(SEMIDIFF_SOURCE_DIR) + "/configs/smoke.json";
    CHECK(cli("run --config " + smoke + " --dry-run --out " + (dir / "dry").string()) == 0);
    CHECK_FALSE(fs::exists(dir / "dry" / "results.csv"));

    fs::create_directories(dir / "empty");
    CHECK(cli("report " + (dir / "empty").string()) == 5);
    CHECK(cli("frobnicate") != 0);
}

TEST_CASE("run and report") {
    const fs::path dir = scratch("run");
    std::ofstream(dir / "axioms.json")
        << R"({"mode": "axioms", "name": "cli-test", "seeds": [0, 1], "axioms": {"k": 2, "n_samples": 500}})";
    const fs::path out = dir / "out";
    REQUIRE(cli("run --config " + (dir / "axioms.json").string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "results.csv"));

    REQUIRE(cli("report " + out.string()) == 0);
    const std::string first_csv = slurp(out / "report.csv"), first_md = slurp(out / "report.md");
    CHECK_FALSE(first_csv.empty());
    REQUIRE(cli("report " + out.string()) == 0);
    CHECK(slurp(out / "report.csv") == first_csv);
    CHECK(slurp(out / "report.md") == first_md);
}
