#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#if !defined(_WIN32)
#include <sys/wait.h>
#endif

using nlohmann::json;

namespace {

struct CommandResult {
    int status = -1;
    std::string output;
};

CommandResult run_command(const std::string& args) {
    std::string command =
        "ETR_COLOR=0 \"" + std::string(ETR_BIN_PATH) + "\" " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CommandResult result;
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof buffer, pipe)) {
        result.output.append(buffer, n);
    }
    int raw = pclose(pipe);
#if defined(_WIN32)
    result.status = raw;
#else
    result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#endif
    return result;
}

std::string write_program(const std::string& name, const std::string& source) {
    std::filesystem::path path =
        std::filesystem::temp_directory_path() / ("etr_cli_" + name + ".etr");
    std::ofstream out(path);
    out << source << "\n";
    REQUIRE(out.good());
    return path.string();
}

const std::string kWellTyped = "(if (nat? 3) (add1 3) 0)";
const std::string kIllTyped = "(add1 true)";
const std::string kDiverging =
    "((lambda (x : Top) (x x)) (lambda (x : Top) (x x)))";
const std::string kRedeclaredLabel =
    "(let-struct-property ((p p? p-acc) (prop Nat))\n"
    " (let-struct ((mkfoo foo? foo-b) (foo Nat ((prop 42))))\n"
    "  (let (v (mkfoo 10))\n"
    "   (let-struct-property ((p1 p1? p-acc1) (prop (-> (x : Self) Nat)))\n"
    "    ((p-acc1 v) v)))))";

}  // namespace

TEST_CASE("check reports the type of a well typed program") {
    std::string path = write_program("ok", kWellTyped);
    CommandResult result = run_command("check " + path);
    CHECK(result.status == 0);
    CHECK(result.output.find("ok : Nat") != std::string::npos);
}

TEST_CASE("check --json emits a machine readable report") {
    std::string path = write_program("ok_json", kWellTyped);
    CommandResult result = run_command("check --json " + path);
    CHECK(result.status == 0);
    json report = json::parse(result.output);
    CHECK(report["status"] == "ok");
    CHECK(report["type"] == "Nat");
    CHECK(report["diagnostics"].empty());
}

TEST_CASE("check --verbose prints propositions and object") {
    std::string path = write_program("verbose", "(nat? 3)");
    CommandResult result = run_command("check --verbose " + path);
    CHECK(result.status == 0);
    CHECK(result.output.find("when-true:") != std::string::npos);
    CHECK(result.output.find("when-false:") != std::string::npos);
    CHECK(result.output.find("object:") != std::string::npos);
}

TEST_CASE("check rejects an ill typed program with a located diagnostic") {
    std::string path = write_program("bad", kIllTyped);
    CommandResult result = run_command("check " + path);
    CHECK(result.status == 1);
    CHECK(result.output.find("error [type-mismatch]") != std::string::npos);

    CommandResult as_json = run_command("check --json " + path);
    CHECK(as_json.status == 1);
    json report = json::parse(as_json.output);
    CHECK(report["status"] == "type-error");
    CHECK(report["type"].is_null());
    REQUIRE_FALSE(report["diagnostics"].empty());
    const json& diag = report["diagnostics"][0];
    CHECK(diag["code"] == "type-mismatch");
    CHECK(diag["message"].is_string());
    CHECK(diag["line"].get<int>() >= 1);
    CHECK(diag["col"].get<int>() >= 1);
}

TEST_CASE("check distinguishes parse errors from type errors") {
    std::string path = write_program("unclosed", "(add1 3");
    CommandResult result = run_command("check " + path);
    CHECK(result.status == 2);
    CHECK(result.output.find("[syntax-error]") != std::string::npos);

    CommandResult as_json = run_command("check --json " + path);
    CHECK(as_json.status == 2);
    json report = json::parse(as_json.output);
    CHECK(report["status"] == "parse-error");
    CHECK(report["diagnostics"][0]["code"] == "syntax-error");
}

TEST_CASE("check fails cleanly on a missing file") {
    CommandResult result = run_command("check /nonexistent/etr/input.etr");
    CHECK(result.status == 2);
    CHECK(result.output.find("cannot open") != std::string::npos);
}

TEST_CASE("run evaluates a well typed program to its value") {
    std::string path = write_program("run_ok", kWellTyped);
    CommandResult result = run_command("run " + path);
    CHECK(result.status == 0);
    CHECK(result.output.find("4") != std::string::npos);
}

TEST_CASE("run refuses an ill typed program unless forced") {
    std::string path = write_program("run_bad", kIllTyped);
    CommandResult result = run_command("run " + path);
    CHECK(result.status == 1);
    CHECK(result.output.find("refusing to run an ill-typed program") !=
          std::string::npos);

    CommandResult forced = run_command("run --unsafe " + path);
    CHECK(forced.status == 3);
    CHECK(forced.output.find("stuck [delta-domain]") != std::string::npos);
}

TEST_CASE("run --unsafe exposes the label redeclaration crash") {
    std::string path = write_program("redeclared", kRedeclaredLabel);
    CommandResult checked = run_command("run " + path);
    CHECK(checked.status == 1);
    CHECK(checked.output.find("[property-redeclared]") != std::string::npos);

    CommandResult forced = run_command("run --unsafe " + path);
    CHECK(forced.status == 3);
    CHECK(forced.output.find("stuck [apply-non-function]") !=
          std::string::npos);
}

TEST_CASE("run reports fuel exhaustion separately from stuck states") {
    std::string path = write_program("diverging", kDiverging);
    CommandResult result = run_command("run --unsafe --fuel 100 " + path);
    CHECK(result.status == 4);
    CHECK(result.output.find("fuel exhausted") != std::string::npos);
}

TEST_CASE("fuzz emits a full machine readable report") {
    CommandResult result =
        run_command("fuzz --count 50 --size 20 --seed 7 --json");
    CHECK(result.status == 0);
    json report = json::parse(result.output);
    for (const char* key :
         {"programsRun", "valueTypeViolations", "propositionViolations",
          "objectViolations", "stuckWellTyped", "fuelExhausted", "notes"}) {
        CHECK_MESSAGE(report.contains(key), key);
    }
    CHECK(report["valueTypeViolations"] == 0);
    CHECK(report["stuckWellTyped"] == 0);
}

TEST_CASE("fuzz prints a human readable summary by default") {
    CommandResult result = run_command("fuzz --count 20 --size 15 --seed 1");
    CHECK(result.status == 0);
    CHECK(result.output.find("programs run:") != std::string::npos);
    CHECK(result.output.find("no violations") != std::string::npos);
}

TEST_CASE("usage errors exit with the input error code") {
    CommandResult missing = run_command("check");
    CHECK(missing.status == 2);
    CommandResult unknown = run_command("frobnicate");
    CHECK(unknown.status == 2);
    CommandResult help = run_command("--help");
    CHECK(help.status == 0);
    CHECK(help.output.find("check") != std::string::npos);
    CHECK(help.output.find("run") != std::string::npos);
    CHECK(help.output.find("fuzz") != std::string::npos);
}
