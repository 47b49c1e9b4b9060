#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "shapval/game.hpp"
#include "shapval/io.hpp"
#include "shapval/parallel.hpp"

namespace fs = std::filesystem;
using namespace shapval;

namespace {

const std::string kBin = SHAPVAL_BIN;

int run_cli(const std::string& args) {
    const std::string cmd = kBin + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

int line_count(const std::string& text) {
    int lines = 0;
    for (char c : text) lines += c == '\n';
    return lines;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("/tmp/shapval_cli") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("synth writes a loadable dataset with manifest") {
    const fs::path out = fresh_dir("synth");
    const int code = run_cli("synth --seed 5 --out " + out.string() +
                             " --set dataset.n_train=12 --set dataset.n_eval=6");
    CHECK(code == 0);
    const std::string csv = slurp(out / "dataset.csv");
    CHECK(line_count(csv) == 19);  // header + 18 rows
    CHECK(slurp(out / "manifest.json").find("\"command\": \"synth\"") != std::string::npos);
    CHECK(slurp(out / "dataset_summary.json").find("\"n_train\":12") != std::string::npos);
}

TEST_CASE("value with the exact method satisfies efficiency and reruns byte-identically") {
    const fs::path out = fresh_dir("exact");
    const std::string common =
        " --seed 9 --set dataset.n_train=8 --set dataset.n_eval=20 --set dataset.dim=3"
        " --set run.method=exact";
    CHECK(run_cli("value --out " + out.string() + common) == 0);
    const std::string first = slurp(out / "values.csv");
    const ValuesFile parsed = parse_values_csv(first);
    REQUIRE(parsed.points.size() == 8);

    // recompute v(D) - v(empty) through the library with the same seed path
    RunConfig config;
    config.n_train = 8;
    config.n_eval = 20;
    config.dim = 3;
    config.seed = 9;
    SeedTree seeds(9);
    const Dataset data = build_dataset(config, seeds);
    const TrainConfig train = build_train_config(config, data);
    ModelGame game(data, train);
    std::vector<int> everyone(8);
    std::iota(everyone.begin(), everyone.end(), 0);
    const double grand =
        game.value(Coalition(everyone), seeds) - game.value(Coalition(), seeds);
    CHECK(std::abs(stable_total(parsed.values) - grand) < 1e-9);

    // identical config reruns byte-identically, at any worker count
    CHECK(run_cli("value --out " + out.string() + common + " --workers 1") == 0);
    CHECK(slurp(out / "values.csv") == first);
    CHECK(run_cli("value --out " + out.string() + common + " --workers 8") == 0);
    CHECK(slurp(out / "values.csv") == first);
}

TEST_CASE("delta manifest records the resolved mid band at n=50") {
    const fs::path out = fresh_dir("deltaband");
    const int code = run_cli(
        "value --seed 4 --out " + out.string() +
        " --set dataset.n_train=50 --set dataset.n_eval=10 --set run.method=delta"
        " --set run.band=mid --set run.iteration_cap=3 --set run.convergence=false");
    CHECK(code == 0);
    const std::string manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"band_lo\": \"17\"") != std::string::npos);
    CHECK(manifest.find("\"band_hi\": \"33\"") != std::string::npos);
    const std::string result = slurp(out / "result.json");
    CHECK(result.find("\"method\": \"delta-shapley\"") != std::string::npos);
}

TEST_CASE("evaluate compares results and flags misalignment") {
    const fs::path dir = fresh_dir("evaluate");
    const std::string task =
        " --seed 3 --set dataset.n_train=10 --set dataset.n_eval=12 --set run.convergence=false"
        " --set run.iteration_cap=40";
    CHECK(run_cli("value --out " + (dir / "mc").string() + task + " --method mc") == 0);
    CHECK(run_cli("value --out " + (dir / "delta").string() + task +
                  " --method delta --set run.band=2:6") == 0);

    CHECK(run_cli("evaluate " + (dir / "mc" / "result.json").string() + " " +
                  (dir / "delta" / "result.json").string() + " --reference " +
                  (dir / "mc" / "result.json").string() + " --out " + (dir / "cmp").string()) ==
          0);
    const std::string csv = slurp(dir / "cmp" / "comparison.csv");
    CHECK(line_count(csv) == 3);  // header + one row per method
    CHECK(csv.find("mc-shapley,1,") != std::string::npos);  // reference vs itself: rho = 1

    // a result built on a different dataset must be rejected
    CHECK(run_cli("value --out " + (dir / "other").string() + task +
                  " --method mc --set dataset.separation=3.5") == 0);
    CHECK(run_cli("evaluate " + (dir / "other" / "result.json").string() + " --reference " +
                  (dir / "mc" / "result.json").string() + " --out " + (dir / "cmp2").string()) ==
          3);
    // missing file: explicit file-not-found, data exit code
    CHECK(run_cli("evaluate /tmp/shapval_nope.json --reference " +
                  (dir / "mc" / "result.json").string() + " --out " + (dir / "cmp3").string()) ==
          3);
}

TEST_CASE("removal produces one reproducible curve per direction") {
    const fs::path dir = fresh_dir("removal");
    const std::string task =
        " --seed 6 --set dataset.n_train=24 --set dataset.n_eval=30 --set dataset.dim=3";
    CHECK(run_cli("value --out " + (dir / "vals").string() + task +
                  " --method mc --set run.iteration_cap=30 --set run.convergence=false") == 0);

    const std::string removal_cmd = "removal --values " + (dir / "vals" / "values.csv").string() +
                                    task + " --step 0.1 --out " + (dir / "curves").string();
    CHECK(run_cli(removal_cmd) == 0);
    for (const char* name :
         {"removal_highest-first.csv", "removal_lowest-first.csv", "removal_random.csv"}) {
        const std::string csv = slurp(dir / "curves" / name);
        CHECK(line_count(csv) == 7);  // header + fractions 0%..50%
    }
    const std::string snapshot = slurp(dir / "curves" / "removal_random.csv");
    CHECK(run_cli(removal_cmd) == 0);
    CHECK(slurp(dir / "curves" / "removal_random.csv") == snapshot);

    // values computed on a different dataset are rejected by the hash check
    CHECK(run_cli("removal --values " + (dir / "vals" / "values.csv").string() +
                  " --seed 6 --set dataset.n_train=26 --set dataset.n_eval=30"
                  " --set dataset.dim=3 --step 0.1 --out " +
                  (dir / "bad").string()) == 3);
}

TEST_CASE("profile with the additive double reports zero spread") {
    const fs::path out = fresh_dir("profile");
    CHECK(run_cli("profile --seed 2 --out " + out.string() +
                  " --set dataset.n_train=12 --layers 3,6 --samples 25 --additive-double") == 0);
    const std::string csv = slurp(out / "profile.csv");
    CHECK(line_count(csv) == 3);
    std::stringstream in(csv);
    std::string header, row;
    std::getline(in, header);
    while (std::getline(in, row)) {
        // layer,mean_abs,median_abs,max_abs,std_abs,samples
        std::stringstream cells(row);
        std::string cell;
        for (int c = 0; c < 5; ++c) std::getline(cells, cell, ',');
        CHECK(std::stod(cell) == 0.0);
    }
}

TEST_CASE("config errors exit with code 2 before any training") {
    CHECK(run_cli("value --config /tmp/shapval_missing.ini --out /tmp/shapval_cli/e1") == 2);
    CHECK(run_cli("value --set run.method=delta --set run.band=nonsense --out /tmp/shapval_cli/e2") ==
          2);
    CHECK(run_cli("value --set run.method=exact --set dataset.n_train=25 --out /tmp/shapval_cli/e3") ==
          2);
    CHECK(run_cli("value --set run.typo=1 --out /tmp/shapval_cli/e4") == 2);
    CHECK(run_cli("value --set run.method=mc --set run.mode=expected-utility --out /tmp/shapval_cli/e5") ==
          2);
    CHECK(run_cli("nonsense-command") == 2);
}
