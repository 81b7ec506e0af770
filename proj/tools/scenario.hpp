#pragma once

// Declarative scenarios for the thermopt command line tool.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thermopt/angles.hpp"
#include "thermopt/control.hpp"
#include "thermopt/gas.hpp"

namespace thermopt::cli {

enum class Command { Maxent, Applicability, Solve, Angles, Components, VirialCheck };

std::string to_string(Command c);

struct Endpoints {
    control::EVPair start;
    control::EVPair end;
    double t0 = 1.0;
};

/// Inclusive uniform axis lo, ..., hi with `count` points.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int count = 2;

    double at(int i) const;
};

struct Measurement {
    std::vector<double> base_probs;
    std::vector<std::vector<double>> values;
    std::vector<double> target;
};

struct VirialSettings {
    std::array<double, 2> direction{1.0, 1.0};
    std::vector<double> eps{1e-2, 3e-3, 1e-3, 3e-4};
    int points = 12;
};

struct Scenario {
    Command command = Command::Solve;
    gas::GasSpec gas;
    control::ControlBudget budget;
    std::optional<Endpoints> endpoints;
    std::optional<angles::InvariantLevels> levels;
    std::string output_path = "thermopt_out";
    std::map<std::string, double> tolerances; ///< flow, shoot, maxent; defaults filled

    std::optional<Measurement> measurement;            // maxent
    std::optional<std::array<Axis, 2>> grid;           // applicability (T, v) or components (h1, h2)
    std::optional<control::PhasePoint> start;          // angles
    double t = 1.0;                                    // angles
    VirialSettings virial;                             // virial-check

    double tolerance(const std::string& name) const { return tolerances.at(name); }
};

/// Parses and validates a scenario document. Throws ValidationError naming
/// unknown keys, missing fields or invalid values.
Scenario parse_scenario(const std::string& text);

struct RunOutput {
    int exit_code = 0;
    std::string json;  ///< summary or report; {"error": ...} on failure
    std::string csv;   ///< empty when the command has no tabular output
};

/// Executes a validated scenario. Solver failures give exit code 2 and
/// validation failures exit code 3; the error text is in json.
RunOutput run(const Scenario& s);

/// Parse + run + write <output_path>.json and (if any) <output_path>.csv.
/// `out` overrides output_path when nonempty. Progress goes to stderr unless quiet.
int run_file(const std::string& path, const std::string& out, bool quiet);

} // namespace thermopt::cli
