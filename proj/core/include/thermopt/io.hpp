#pragma once

// Number formatting and JSON (de)serialization of the report types.

#include <string>
#include <vector>

#include "thermopt/gas.hpp"
#include "thermopt/maxent.hpp"

namespace thermopt::io {

/// Shortest decimal representation that round-trips (at most 17 significant digits).
std::string format_double(double x);

std::string gas_spec_to_json(const gas::GasSpec& spec);
gas::GasSpec gas_spec_from_json(const std::string& text);

/// {"lambda":[...],"density":[...],"info_gain":...}
std::string maxent_solution_to_json(const maxent::MaxEntSolution& s);
maxent::MaxEntSolution maxent_solution_from_json(const std::string& text);

struct ComponentReport {
    double h1 = 0.0;
    double h2 = 0.0;
    std::vector<double> roots;
    int components = 0;
};

/// {"levels":{"h1":...,"h2":...},"roots":[...],"components":2|3}
std::string component_report_to_json(const ComponentReport& r);
ComponentReport component_report_from_json(const std::string& text);

struct OrderReport {
    std::vector<double> direction;
    std::vector<double> eps;
    std::vector<double> bracket_norms;
    double slope = 0.0;
    bool floor_limited = false;
};

/// {"direction":[a,b],"eps":[...],"bracket_norms":[...],"slope":...}
std::string order_report_to_json(const OrderReport& r);
OrderReport order_report_from_json(const std::string& text);

} // namespace thermopt::io
