#include <CLI11.hpp>

#include "scenario.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"thermopt: thermodynamic optimal control scenarios"};
    std::string scenario;
    std::string out;
    bool quiet = false;
    app.add_option("scenario", scenario, "Path to the scenario JSON file")->required();
    app.add_option("--out", out, "Output path prefix (overrides output_path)");
    app.add_flag("--quiet", quiet, "Suppress progress lines on standard error");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }
    return thermopt::cli::run_file(scenario, out, quiet);
}
