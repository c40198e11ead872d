#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "vdbelief/cli.hpp"
#include "vdbelief/json_io.hpp"

using namespace vdbelief;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("vdbelief_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

} // namespace

TEST_CASE("factory emit, solve, search, bounds and exec round trip") {
    TempDir tmp;
    std::string model = tmp.file("factory.json");
    std::string vf = tmp.file("vf.json");
    std::string assignment = tmp.file("assignment.json");
    std::string bounds = tmp.file("bounds.json");
    std::string report = tmp.file("exec.json");

    CHECK(run_cli({"factory", "--emit", model}) == 0);
    CHECK(fs::exists(model));

    CHECK(run_cli({"solve", model, "--out", vf}) == 0);
    CHECK(fs::exists(vf));

    CHECK(run_cli({"search", model, vf, "--bound", "e", "--horizon", "finite",
                   "--max-constraints", "6", "--out-assignment", assignment, "--out-bounds",
                   bounds}) == 0);
    Json bj = Json::parse(read_file(bounds));
    CHECK(bj["value"].get<double>() == doctest::Approx(0.0));
    CHECK(bj["kind"] == "e_finite");

    // The searched assignment preserves exactly the documented pairs.
    Json aj = Json::parse(read_file(assignment));
    auto has_pair = [&](const std::string& stage, std::vector<std::string> pair) {
        for (const auto& [id, blocks] : aj["assignment"][stage].items()) {
            bool found = false;
            for (const auto& block : blocks)
                if (block.get<std::vector<std::string>>() == pair) found = true;
            if (!found) return false;
        }
        return true;
    };
    CHECK(has_pair("4", {"FM", "F3"}));
    CHECK(has_pair("3", {"F3", "F4"}));
    CHECK(has_pair("2", {"F3", "F4"}));
    CHECK(has_pair("1", {"F3", "F4"}));

    CHECK(run_cli({"bounds", model, vf, assignment, "--out", tmp.file("b2.json")}) == 0);
    Json both = Json::parse(read_file(tmp.file("b2.json")));
    CHECK(both["e"]["value"].get<double>() == doctest::Approx(0.0));
    CHECK(both["e"]["value"].get<double>() <= both["u"]["value"].get<double>() + 1e-9);

    // Projected execution under the searched assignment stays lossless.
    CHECK(run_cli({"exec", model, vf, assignment, "--out", report}) == 0);
    Json rj = Json::parse(read_file(report));
    CHECK(rj["loss"].get<double>() == doctest::Approx(0.0).epsilon(1e-9));

    // Exact monitoring needs no assignment.
    CHECK(run_cli({"exec", model, vf, "--exact", "--out", tmp.file("exact.json")}) == 0);
}

TEST_CASE("missing files exit with the IO code") {
    TempDir tmp;
    CHECK(run_cli({"solve", tmp.file("nope.json")}) == 2);
    CHECK(run_cli({"factory", "--emit", (tmp.path / "no" / "dir" / "x.json").string()}) == 2);
}

TEST_CASE("domain errors exit with code one") {
    TempDir tmp;
    std::string model = tmp.file("factory.json");
    REQUIRE(run_cli({"factory", "--emit", model}) == 0);
    CHECK(run_cli({"solve", model, "--horizon", "0"}) == 1);
    CHECK(run_cli({"search", model, tmp.file("missing-vf.json"), "--max-constraints", "6"}) == 2);

    std::string vf = tmp.file("vf.json");
    REQUIRE(run_cli({"solve", model, "--out", vf}) == 0);
    CHECK(run_cli({"search", model, vf, "--max-constraints", "2"}) == 1); // below variable count
}

TEST_CASE("table2 emits the sweep with reference flags") {
    TempDir tmp;
    std::string out = tmp.file("table2.json");
    CHECK(run_cli({"table2", "--out", out}) == 0);
    Json j = Json::parse(read_file(out));
    REQUIRE(j["rows"].size() == 8);
    int matches = 0;
    for (const auto& row : j["rows"])
        if (row["matches_reference"].get<bool>()) ++matches;
    CHECK(matches >= 2); // measurement stages 3..1 hit the reference values

    // Machine never faulty: parts are independent, all distances vanish.
    std::string zero = tmp.file("t2zero.json");
    CHECK(run_cli({"table2", "--prior", "0", "--out", zero}) == 0);
    Json z = Json::parse(read_file(zero));
    for (const auto& row : z["rows"]) {
        CHECK(row["l1"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(row["kl_e"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(row["loss"].get<double>() == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("random-priors is deterministic and the full joint never loses") {
    TempDir tmp;
    std::string a = tmp.file("a.json"), b = tmp.file("b.json");
    CHECK(run_cli({"random-priors", "--trials", "50", "--seed", "9", "--out", a}) == 0);
    CHECK(run_cli({"random-priors", "--trials", "50", "--seed", "9", "--out", b}) == 0);
    Json ja = Json::parse(read_file(a)), jb = Json::parse(read_file(b));
    ja.erase("wall_seconds"); // results are seed-deterministic; timing is not
    jb.erase("wall_seconds");
    CHECK(ja.dump() == jb.dump());

    std::string full = tmp.file("full.json");
    CHECK(run_cli({"random-priors", "--trials", "25", "--scheme", "full", "--out", full}) == 0);
    Json j = Json::parse(read_file(full));
    CHECK(j["rows"][0]["suboptimal_runs"].get<int>() == 0);
    CHECK(j["rows"][0]["avg_loss_unconditional"].get<double>() ==
          doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("emitted documents carry the documented shapes") {
    TempDir tmp;
    std::string model = tmp.file("factory.json"), vf = tmp.file("vf.json");
    std::string assignment = tmp.file("a.json"), bounds = tmp.file("b.json");
    std::string report = tmp.file("r.json");
    REQUIRE(run_cli({"factory", "--emit", model}) == 0);
    REQUIRE(run_cli({"solve", model, "--out", vf}) == 0);
    REQUIRE(run_cli({"search", model, vf, "--max-constraints", "6", "--out-assignment",
                     assignment, "--out-bounds", bounds}) == 0);
    REQUIRE(run_cli({"exec", model, vf, assignment, "--out", report}) == 0);

    Json mj = Json::parse(read_file(model));
    for (const char* key : {"variables", "observations", "actions", "discount", "horizon"})
        CHECK(mj.contains(key));
    CHECK(mj["variables"].is_array());
    CHECK(mj["actions"][0]["name"].is_string());

    Json vj = Json::parse(read_file(vf));
    CHECK(vj["discount"].is_number());
    for (const auto& stage : vj["stages"]) {
        CHECK(stage["stage"].is_number_integer());
        for (const auto& vec : stage["vectors"]) {
            CHECK(vec["id"].is_number_integer());
            CHECK(vec["action"].is_string());
            CHECK(vec["values"].is_array());
            CHECK(vec["strategy"].is_object());
        }
    }

    Json aj = Json::parse(read_file(assignment));
    CHECK(aj["assignment"].is_object());
    for (const auto& [stage, ids] : aj["assignment"].items())
        for (const auto& [id, scheme] : ids.items()) {
            CHECK(scheme.is_array());
            CHECK(scheme[0].is_array());
            CHECK(scheme[0][0].is_string());
        }

    Json bj = Json::parse(read_file(bounds));
    for (const char* key : {"kind", "value", "gamma", "per_stage", "per_alpha"})
        CHECK(bj.contains(key));

    Json rj = Json::parse(read_file(report));
    for (const char* key : {"realized_expected_value", "optimal_expected_value", "loss",
                            "chosen_alpha_ids", "suboptimal_action_count"})
        CHECK(rj.contains(key));
}

TEST_CASE("emitted factory file round trips through the CLI solver") {
    TempDir tmp;
    std::string model = tmp.file("factory.json");
    std::string vf1 = tmp.file("vf1.json");
    REQUIRE(run_cli({"factory", "--emit", model}) == 0);
    REQUIRE(run_cli({"solve", model, "--out", vf1}) == 0);

    // Parse the emitted model and compare against the built-in structure.
    FactoredPOMDP parsed = parse_model(read_file(model));
    CHECK(parsed.actions.size() == 10);
    CHECK(parsed.space.size() == 32);
    Json vf_json = Json::parse(read_file(vf1));
    CHECK(vf_json["stages"].size() == 7);
    CHECK(vf_json["stages"][0]["vectors"].size() == 2);
}
