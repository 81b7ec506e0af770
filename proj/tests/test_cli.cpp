#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "scenario.hpp"
#include "thermopt/errors.hpp"
#include "thermopt/io.hpp"

using namespace thermopt;
using namespace thermopt::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_binary(const std::string& scenario, const fs::path& prefix)
{
    const std::string cmd = std::string("\"") + THERMOPT_CLI + "\" \"" + scenario + "\" --quiet --out \"" +
                            prefix.string() + "\" > /dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string fixture(const std::string& name) { return std::string(THERMOPT_SCENARIOS) + "/" + name; }

fs::path scratch_dir()
{
    const auto dir = fs::temp_directory_path() / "thermopt_cli_tests";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("scenario parsing fills defaults")
{
    const auto s = parse_scenario(R"({"command":"solve","endpoints":{"start":[1.5,1],"end":[1,2],"t0":2}})");
    CHECK(s.command == Command::Solve);
    CHECK(s.gas.n == 3.0);
    CHECK(s.gas.R == 1.0);
    CHECK(s.budget.delta == 1.0);
    CHECK(s.tolerance("flow") == 1e-10);
    CHECK(s.endpoints->t0 == 2.0);
}

TEST_CASE("scenario validation errors")
{
    CHECK_THROWS_AS(parse_scenario(R"({"command":"solve","budget":{"delta":-1},
        "endpoints":{"start":[1,1],"end":[1,2]}})"), ValidationError);
    try {
        parse_scenario(R"({"command":"fly"})");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        for (const char* c : {"maxent", "applicability", "solve", "angles", "components", "virial-check"}) {
            CHECK(msg.find(c) != std::string::npos);
        }
    }
    try {
        parse_scenario(R"({"command":"maxent","colour":1,"shape":2})");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("colour") != std::string::npos);
        CHECK(msg.find("shape") != std::string::npos);
    }
    try {
        parse_scenario(R"({"command":"solve"})");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("endpoints") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario(R"({"command":"solve","tolerances":{"flow":0},
        "endpoints":{"start":[1,1],"end":[1,2]}})"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("{"), ValidationError);
    CHECK_THROWS_AS(parse_scenario(R"({"command":"components","gas":{"kind":"vdw","a":1,"b":0.1},
        "levels":{"h1":1,"h2":0}})"), ValidationError);
}

TEST_CASE("components grid agrees with the level relation")
{
    const auto s = parse_scenario(R"({"command":"components","grid":{"h1":[0.05,5,50],"h2":[-4,4,50]}})");
    const auto out = run(s);
    REQUIRE(out.exit_code == 0);
    const auto j = nlohmann::json::parse(out.json);
    CHECK(j["disagreements"] == 0);
    CHECK(j["components"].size() == 50);
    for (const auto& row : j["components"]) {
        for (const auto& c : row) CHECK((c == 2 || c == 3));
    }
}

TEST_CASE("fixture scenarios: exit codes and determinism")
{
    const auto dir = scratch_dir();
    const std::pair<const char*, int> cases[] = {
        {"maxent.json", 0},     {"applicability_vdw.json", 0}, {"solve.json", 0},
        {"angles.json", 0},     {"components.json", 0},        {"virial_check.json", 0},
        {"solve_unreachable.json", 2}, {"invalid_delta.json", 3},
    };
    for (const auto& [name, code] : cases) {
        CAPTURE(name);
        const auto a = dir / (std::string(name) + ".a");
        const auto b = dir / (std::string(name) + ".b");
        CHECK(run_binary(fixture(name), a) == code);
        CHECK(run_binary(fixture(name), b) == code);
        CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));
        if (fs::exists(a.string() + ".csv")) CHECK(slurp(a.string() + ".csv") == slurp(b.string() + ".csv"));
        const auto report = nlohmann::json::parse(slurp(a.string() + ".json"));
        CHECK(report.contains("error") == (code != 0));
    }
    CHECK(run_binary(fixture("does_not_exist.json"), dir / "missing") == 3);
}

TEST_CASE("solve fixture recovers its forward-generated endpoint")
{
    const auto dir = scratch_dir();
    REQUIRE(run_binary(fixture("solve.json"), dir / "solve") == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "solve.json"));
    CHECK(j["residual"].get<double>() <= 1e-8);
    CHECK(j["component_count"].get<int>() == 2);
    const auto csv = slurp(dir / "solve.csv");
    CHECK(csv.rfind("t,q1,q2,l1,l2,e,v,H,G,J_cum\n", 0) == 0);

    const auto u = nlohmann::json::parse(slurp(fixture("solve_unreachable.json")));
    REQUIRE(run_binary(fixture("solve_unreachable.json"), dir / "unreachable") == 2);
    const auto e = nlohmann::json::parse(slurp(dir / "unreachable.json"));
    CHECK(e["error"].get<std::string>().find("unreachable") != std::string::npos);
}

TEST_CASE("reports re-parse under their schema")
{
    const auto dir = scratch_dir();
    REQUIRE(run_binary(fixture("virial_check.json"), dir / "virial") == 0);
    const auto text = slurp(dir / "virial.json");
    const auto r = io::order_report_from_json(text);
    CHECK(r.slope >= 1.8);
    CHECK(r.slope <= 2.2);
    REQUIRE(run_binary(fixture("maxent.json"), dir / "maxent") == 0);
    const auto m = io::maxent_solution_from_json(slurp(dir / "maxent.json"));
    CHECK(m.density.size() == 4);

    const auto s = parse_scenario(R"({"command":"components","levels":{"h1":0.01,"h2":1}})");
    const auto out = run(s);
    const auto c = io::component_report_from_json(out.json);
    CHECK(c.components == 3);
    CHECK(c.roots.size() == 3);
}
