#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "etr/eval.hpp"
#include "etr/parser.hpp"
#include "etr/printer.hpp"
#include "etr/soundness.hpp"
#include "etr/typecheck.hpp"

#if defined(_WIN32)
#define ETR_ISATTY() false
#else
#include <unistd.h>
#define ETR_ISATTY() (isatty(fileno(stdout)) != 0)
#endif

namespace {

using nlohmann::json;

// Exit codes shared by the subcommands.
constexpr int kExitOk = 0;
constexpr int kExitTypeError = 1;
constexpr int kExitInput = 2;  // unreadable file, parse error, bad usage
constexpr int kExitStuck = 3;
constexpr int kExitFuel = 4;
constexpr int kExitUnsound = 5;

bool use_color() {
    if (const char* setting = std::getenv("ETR_COLOR")) {
        return std::string(setting) != "0";
    }
    return ETR_ISATTY();
}

std::string paint(const std::string& text, const char* code) {
    if (!use_color()) return text;
    return std::string("\033[") + code + "m" + text + "\033[0m";
}

std::string red(const std::string& text) { return paint(text, "31"); }
std::string green(const std::string& text) { return paint(text, "32"); }
std::string yellow(const std::string& text) { return paint(text, "33"); }

bool read_file(const std::string& path, std::string& out, std::string& error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        error = "cannot open '" + path + "'";
        return false;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    out = buffer.str();
    return true;
}

json diagnostic_json(const etr::Diagnostic& d) {
    return json{{"code", etr::error_code_name(d.code)},
                {"message", d.message},
                {"line", d.loc.line},
                {"col", d.loc.col}};
}

void print_diagnostic(const etr::Diagnostic& d) {
    std::string where;
    if (d.loc.known()) {
        where = std::to_string(d.loc.line) + ":" + std::to_string(d.loc.col) + ": ";
    }
    std::cout << where << red("error") << " [" << etr::error_code_name(d.code)
              << "] " << d.message << "\n";
}

struct LoadedProgram {
    etr::ExprRef tree;
    std::string parse_message;
    etr::SourceLoc parse_loc;
    bool io_failed = false;
    std::string io_error;

    bool ok() const { return tree != nullptr; }
};

LoadedProgram load_program(const std::string& path) {
    LoadedProgram loaded;
    std::string source;
    if (!read_file(path, source, loaded.io_error)) {
        loaded.io_failed = true;
        return loaded;
    }
    try {
        loaded.tree = etr::parse_program(source);
    } catch (const etr::SyntaxError& err) {
        loaded.parse_message = err.what();
        loaded.parse_loc = err.loc;
    }
    return loaded;
}

void print_parse_error(const LoadedProgram& loaded) {
    std::string where;
    if (loaded.parse_loc.known()) {
        where = std::to_string(loaded.parse_loc.line) + ":" +
                std::to_string(loaded.parse_loc.col) + ": ";
    }
    std::cout << where << red("error") << " [syntax-error] "
              << loaded.parse_message << "\n";
}

int run_check(const std::string& path, bool as_json, bool verbose) {
    LoadedProgram loaded = load_program(path);
    if (loaded.io_failed) {
        if (as_json) {
            std::cout << json{{"status", "parse-error"},
                              {"type", nullptr},
                              {"diagnostics",
                               json::array({{{"code", "io-error"},
                                             {"message", loaded.io_error},
                                             {"line", 0},
                                             {"col", 0}}})}}
                             .dump(2)
                      << "\n";
        } else {
            std::cout << red("error") << " " << loaded.io_error << "\n";
        }
        return kExitInput;
    }
    if (!loaded.ok()) {
        if (as_json) {
            json diags = json::array();
            diags.push_back({{"code", "syntax-error"},
                             {"message", loaded.parse_message},
                             {"line", loaded.parse_loc.line},
                             {"col", loaded.parse_loc.col}});
            std::cout << json{{"status", "parse-error"},
                              {"type", nullptr},
                              {"diagnostics", diags}}
                             .dump(2)
                      << "\n";
        } else {
            print_parse_error(loaded);
        }
        return kExitInput;
    }

    etr::CheckOutcome outcome = etr::check_program(loaded.tree);
    if (as_json) {
        json diags = json::array();
        for (const auto& d : outcome.diagnostics) diags.push_back(diagnostic_json(d));
        json report = {
            {"status", outcome.ok() ? "ok" : "type-error"},
            {"type", outcome.ok() ? json(etr::print(outcome.result->type)) : json(nullptr)},
            {"diagnostics", diags},
        };
        std::cout << report.dump(2) << "\n";
        return outcome.ok() ? kExitOk : kExitTypeError;
    }

    if (!outcome.ok()) {
        for (const auto& d : outcome.diagnostics) print_diagnostic(d);
        return kExitTypeError;
    }
    const etr::TypeResult& result = *outcome.result;
    std::cout << green("ok") << " : " << etr::print(result.type) << "\n";
    if (verbose) {
        std::cout << "  when-true:  " << etr::print(result.when_true) << "\n";
        std::cout << "  when-false: " << etr::print(result.when_false) << "\n";
        std::cout << "  object:     " << etr::print(result.object) << "\n";
        if (!outcome.fresh_vars.empty()) {
            std::cout << "  existentials:";
            for (const auto& name : outcome.fresh_vars) std::cout << " " << name;
            std::cout << "\n";
        }
    }
    return kExitOk;
}

int run_run(const std::string& path, std::uint64_t fuel, bool unsafe) {
    LoadedProgram loaded = load_program(path);
    if (loaded.io_failed) {
        std::cout << red("error") << " " << loaded.io_error << "\n";
        return kExitInput;
    }
    if (!loaded.ok()) {
        print_parse_error(loaded);
        return kExitInput;
    }

    etr::CheckOutcome outcome = etr::check_program(loaded.tree);
    if (!outcome.ok()) {
        for (const auto& d : outcome.diagnostics) print_diagnostic(d);
        if (!unsafe) {
            std::cout << red("refusing to run an ill-typed program")
                      << " (pass --unsafe to run it anyway)\n";
            return kExitTypeError;
        }
        std::cout << yellow("running anyway (--unsafe)") << "\n";
    }

    etr::EvalOptions options;
    options.fuel = fuel;
    etr::EvalOutcome run = etr::evaluate(outcome.resolved, options);
    if (run.out_of_fuel()) {
        std::cout << yellow("fuel exhausted") << " after " << fuel << " steps\n";
        return kExitFuel;
    }
    if (!run.ok()) {
        std::string where;
        if (run.stuck->loc.known()) {
            where = std::to_string(run.stuck->loc.line) + ":" +
                    std::to_string(run.stuck->loc.col) + ": ";
        }
        std::cout << where << red("stuck") << " ["
                  << etr::stuck_kind_name(run.stuck->kind) << "] "
                  << run.stuck->message << "\n";
        return kExitStuck;
    }
    std::cout << etr::print_value(run.value) << "\n";
    return kExitOk;
}

int run_fuzz_cmd(std::uint64_t count, int size, std::uint64_t seed,
                 std::uint64_t fuel, bool as_json) {
    etr::SoundnessReport report = etr::run_fuzz(count, size, seed, fuel);
    if (as_json) {
        json out = {
            {"programsRun", report.programs_run},
            {"valueTypeViolations", report.value_type_violations},
            {"propositionViolations", report.proposition_violations},
            {"objectViolations", report.object_violations},
            {"stuckWellTyped", report.stuck_well_typed},
            {"fuelExhausted", report.fuel_exhausted},
            {"notes", report.notes},
        };
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "programs run:           " << report.programs_run << "\n";
        std::cout << "value type violations:  " << report.value_type_violations << "\n";
        std::cout << "proposition violations: " << report.proposition_violations << "\n";
        std::cout << "object violations:      " << report.object_violations << "\n";
        std::cout << "stuck while well typed: " << report.stuck_well_typed << "\n";
        std::cout << "fuel exhausted:         " << report.fuel_exhausted << "\n";
        for (const auto& note : report.notes) {
            std::cout << yellow("violation") << " " << note << "\n";
        }
        std::cout << (report.clean() ? green("no violations")
                                     : red("soundness violations found"))
                  << "\n";
    }
    return report.clean() ? kExitOk : kExitUnsound;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Type checker and evaluator for a calculus of occurrence "
                 "typing with structure type properties"};
    app.require_subcommand(1);

    std::string check_file;
    bool check_json = false;
    bool check_verbose = false;
    CLI::App* check = app.add_subcommand("check", "Type-check a program");
    check->add_option("file", check_file, "program file")->required();
    check->add_flag("--json", check_json, "machine-readable report");
    check->add_flag("--verbose", check_verbose, "also print propositions and object");

    std::string run_file;
    std::uint64_t run_fuel = 1'000'000;
    bool run_unsafe = false;
    CLI::App* run = app.add_subcommand("run", "Type-check and evaluate a program");
    run->add_option("file", run_file, "program file")->required();
    run->add_option("--fuel", run_fuel, "maximum evaluation steps");
    run->add_flag("--unsafe", run_unsafe, "evaluate even if ill-typed");

    std::uint64_t fuzz_count = 1000;
    int fuzz_size = 25;
    std::uint64_t fuzz_seed = 0;
    std::uint64_t fuzz_fuel = 1'000'000;
    bool fuzz_json = false;
    CLI::App* fuzz =
        app.add_subcommand("fuzz", "Generate programs and check every run "
                                   "against the checked type");
    fuzz->add_option("--count", fuzz_count, "number of programs");
    fuzz->add_option("--size", fuzz_size, "generation budget per program")
        ->check(CLI::PositiveNumber);
    fuzz->add_option("--seed", fuzz_seed, "base seed");
    fuzz->add_option("--fuel", fuzz_fuel, "maximum evaluation steps per program");
    fuzz->add_flag("--json", fuzz_json, "machine-readable report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int code = app.exit(err);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (check->parsed()) return run_check(check_file, check_json, check_verbose);
    if (run->parsed()) return run_run(run_file, run_fuel, run_unsafe);
    if (fuzz->parsed())
        return run_fuzz_cmd(fuzz_count, fuzz_size, fuzz_seed, fuzz_fuel, fuzz_json);
    return kExitInput;
}
