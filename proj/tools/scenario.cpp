#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thermopt/dynamics.hpp"
#include "thermopt/errors.hpp"
#include "thermopt/io.hpp"
#include "thermopt/maxent.hpp"
#include "thermopt/virial.hpp"

namespace thermopt::cli {

using nlohmann::json;

namespace {

const std::map<std::string, Command> kCommands = {
    {"maxent", Command::Maxent},         {"applicability", Command::Applicability},
    {"solve", Command::Solve},           {"angles", Command::Angles},
    {"components", Command::Components}, {"virial-check", Command::VirialCheck},
};

const std::map<std::string, double> kDefaultTolerances = {{"flow", 1e-10}, {"shoot", 1e-8}, {"maxent", 1e-10}};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object()) throw ValidationError(where + " must be a JSON object");
    std::string unknown;
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    }
    if (!unknown.empty()) throw ValidationError("unknown keys in " + where + ": " + unknown);
}

double number(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) throw ValidationError(where + " requires '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(where + "." + key + " must be a number");
    return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where)
{
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::vector<double> numbers(const json& v, const std::string& where)
{
    if (!v.is_array()) throw ValidationError(where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError(where + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::array<double, 2> pair_of(const json& v, const std::string& where)
{
    const auto xs = numbers(v, where);
    if (xs.size() != 2) throw ValidationError(where + " must have two entries");
    return {xs[0], xs[1]};
}

Axis axis_of(const json& v, const std::string& where)
{
    const auto xs = numbers(v, where);
    if (xs.size() != 3) throw ValidationError(where + " must be [lo, hi, count]");
    Axis a{xs[0], xs[1], static_cast<int>(xs[2])};
    if (a.count < 1 || static_cast<double>(a.count) != xs[2]) throw ValidationError(where + ": count must be a positive integer");
    if (!(a.hi >= a.lo)) throw ValidationError(where + ": hi must not be below lo");
    return a;
}

std::string schema_hint(Command c)
{
    switch (c) {
    case Command::Maxent: return "maxent needs 'measurement' {base_probs, values, target}";
    case Command::Applicability: return "applicability needs 'grid' {T: [lo, hi, n], v: [lo, hi, n]}";
    case Command::Solve: return "solve needs 'endpoints' {start: [e, v], end: [e, v], t0}";
    case Command::Angles: return "angles needs 'start' [q1, q2, l1, l2] and 't'";
    case Command::Components: return "components needs 'grid' {h1: [lo, hi, n], h2: [lo, hi, n]} or 'levels' {h1, h2}";
    case Command::VirialCheck: return "virial-check needs 'levels' {h1, h2}";
    }
    return "";
}

void require_ideal(const Scenario& s)
{
    if (s.gas.kind != gas::GasKind::Ideal) {
        throw ValidationError(to_string(s.command) + " is defined for the ideal gas only (gas.kind = \"ideal\")");
    }
}

json levels_json(const angles::InvariantLevels& l) { return {{"h1", l.h1}, {"h2", l.h2}}; }

std::string dump(const json& j) { return j.dump() + "\n"; }

// ---------------------------------------------------------------------------

RunOutput run_maxent(const Scenario& s)
{
    const auto& m = *s.measurement;
    std::vector<Eigen::VectorXd> values;
    for (const auto& row : m.values) values.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
    const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(m.target.data(), static_cast<Eigen::Index>(m.target.size()));
    const auto measurement = maxent::make_measurement(m.base_probs, values, target);
    maxent::SolveOptions opts;
    opts.tol = s.tolerance("maxent");
    const auto sol = maxent::solve_lambda(measurement, opts);
    return {0, io::maxent_solution_to_json(sol) + "\n", ""};
}

RunOutput run_applicability(const Scenario& s)
{
    const auto& [tax, vax] = *s.grid;
    std::ostringstream csv;
    csv << "T,v,e,p,applicable\n";
    int applicable = 0;
    int total = 0;
    for (int i = 0; i < tax.count; ++i) {
        for (int j = 0; j < vax.count; ++j) {
            const double T = tax.at(i);
            const double v = vax.at(j);
            gas::StatePoint st;
            bool ok = false;
            try {
                switch (s.gas.kind) {
                case gas::GasKind::Ideal: st = gas::state_ideal(s.gas, 0.5 * s.gas.n * s.gas.R * T, v); break;
                case gas::GasKind::VanDerWaals: st = gas::state_vdw(s.gas, T, v); break;
                case gas::GasKind::VirialFirstOrder: st = gas::state_virial(s.gas, T, v); break;
                }
                ok = gas::applicability(s.gas, st);
            } catch (const DomainError&) {
                st.T = T;
                st.v = v;
                st.e = std::nan("");
                st.p = std::nan("");
            }
            ++total;
            applicable += ok ? 1 : 0;
            csv << io::format_double(T) << ',' << io::format_double(v) << ',' << io::format_double(st.e) << ','
                << io::format_double(st.p) << ',' << (ok ? 1 : 0) << '\n';
        }
    }
    json j = {{"command", "applicability"}, {"gas", json::parse(io::gas_spec_to_json(s.gas))},
              {"points", total}, {"applicable", applicable}};
    return {0, dump(j), csv.str()};
}

RunOutput run_solve(const Scenario& s)
{
    const auto& ep = *s.endpoints;
    dynamics::ShootingProblem problem{ep.start, ep.end, ep.t0, s.gas, s.budget};
    dynamics::ShootOptions opts;
    opts.tol = s.tolerance("shoot");
    opts.flow.tol = s.tolerance("flow");
    dynamics::ShootResult r;
    try {
        r = dynamics::shoot(problem, opts);
    } catch (const UnreachableEndpointError& ex) {
        throw UnreachableEndpointError(std::string("unreachable: ") + ex.what());
    }
    std::ostringstream csv;
    dynamics::write_trajectory_csv(csv, s.gas, r.traj);

    const auto start = r.traj.states.front();
    const auto levels = angles::levels_of(s.gas, s.budget, start);
    json count = nullptr;
    if (levels.h1 > 0.0) count = angles::component_count(s.gas, s.budget, levels);
    json j = {{"J", r.work},
              {"h_drift", r.traj.h_drift},
              {"g_drift", r.traj.g_drift},
              {"lambda0", {r.lambda0[0], r.lambda0[1]}},
              {"component_count", count},
              {"levels", levels_json(levels)},
              {"residual", r.residual},
              {"multiple", r.multiple}};
    return {0, dump(j), csv.str()};
}

RunOutput run_angles(const Scenario& s)
{
    const auto start = *s.start;
    const auto levels = angles::levels_of(s.gas, s.budget, start);
    dynamics::FlowOptions fo;
    fo.tol = s.tolerance("flow");
    auto traj = dynamics::flow(dynamics::reduced_hamiltonian_function(s.gas, s.budget), start, s.t, fo);
    if (traj.truncated) throw ConvergenceError("angles: reference flow was truncated");
    dynamics::attach_work(s.gas, traj);

    double deviation = 0.0;
    int flips = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto a = angles::solve_by_angles(s.gas, s.budget, levels, start, traj.times[i]);
        const auto x = traj.states[i];
        deviation = std::max({deviation, std::abs(a.point.q1 - x.q1), std::abs(a.point.q2 - x.q2),
                              std::abs(a.point.l1 - x.l1), std::abs(a.point.l2 - x.l2)});
        flips = a.flips;
    }
    std::ostringstream csv;
    dynamics::write_trajectory_csv(csv, s.gas, traj);
    json j = {{"levels", levels_json(levels)},
              {"component_count", angles::component_count(s.gas, s.budget, levels)},
              {"max_deviation", deviation},
              {"flips", flips},
              {"h_drift", traj.h_drift},
              {"g_drift", traj.g_drift}};
    return {0, dump(j), csv.str()};
}

RunOutput run_components(const Scenario& s)
{
    if (!s.grid) {
        io::ComponentReport r;
        r.h1 = s.levels->h1;
        r.h2 = s.levels->h2;
        r.roots = angles::singular_set(s.gas, s.budget, *s.levels);
        r.components = angles::component_count(s.gas, s.budget, *s.levels);
        return {0, io::component_report_to_json(r) + "\n", ""};
    }
    const auto& [h1ax, h2ax] = *s.grid;
    std::ostringstream csv;
    csv << "h1,h2,components,by_roots\n";
    json rows = json::array();
    std::vector<double> h1s;
    std::vector<double> h2s;
    for (int j = 0; j < h2ax.count; ++j) h2s.push_back(h2ax.at(j));
    int checked = 0;
    int degenerate = 0;
    int disagree = 0;
    for (int i = 0; i < h1ax.count; ++i) {
        const double h1 = h1ax.at(i);
        h1s.push_back(h1);
        json row = json::array();
        for (const double h2 : h2s) {
            const angles::InvariantLevels lv{h1, h2};
            if (!(h1 > 0.0)) {
                ++degenerate;
                row.push_back(nullptr);
                csv << io::format_double(h1) << ',' << io::format_double(h2) << ",,\n";
                continue;
            }
            const int formula = angles::component_count_formula(s.gas, s.budget, lv);
            const double h2sq = h2 * h2;
            const double lhs = h2sq * h2sq * s.budget.delta * s.gas.n * s.gas.n;
            const double rhs = 64.0 * s.gas.R * h1 * h1;
            std::string counted;
            if (std::abs(lhs - rhs) <= 1e-9 * (lhs + rhs)) {
                ++degenerate;
            } else {
                const int c = angles::component_count_by_roots(s.gas, s.budget, lv);
                ++checked;
                disagree += c != formula ? 1 : 0;
                counted = std::to_string(c);
            }
            row.push_back(formula);
            csv << io::format_double(h1) << ',' << io::format_double(h2) << ',' << formula << ',' << counted << '\n';
        }
        rows.push_back(row);
    }
    json j = {{"h1", h1s},
              {"h2", h2s},
              {"components", rows},
              {"checked_cells", checked},
              {"degenerate_cells", degenerate},
              {"disagreements", disagree}};
    if (disagree > 0) {
        throw InternalConsistencyError("components: " + std::to_string(disagree) +
                                       " cells disagree with root counting");
    }
    return {0, dump(j), csv.str()};
}

RunOutput run_virial(const Scenario& s)
{
    virial::OrderCheckOptions opts;
    opts.direction = s.virial.direction;
    opts.points = s.virial.points;
    const auto r = virial::commutation_order_check(s.gas, s.budget, *s.levels, s.virial.eps, opts);
    json j = json::parse(io::order_report_to_json(r.corrected));
    j["uncorrected"] = json::parse(io::order_report_to_json(r.uncorrected));
    j["levels"] = levels_json(*s.levels);
    return {0, dump(j), ""};
}

RunOutput failure(int code, const std::string& message)
{
    return {code, dump(json{{"error", message}}), ""};
}

} // namespace

std::string to_string(Command c)
{
    for (const auto& [name, cmd] : kCommands) {
        if (cmd == c) return name;
    }
    return "?";
}

double Axis::at(int i) const
{
    if (count == 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

Scenario parse_scenario(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("scenario is not valid JSON: ") + ex.what());
    }
    check_keys(doc,
               {"command", "gas", "budget", "endpoints", "levels", "output_path", "tolerances", "measurement", "grid",
                "start", "t", "virial"},
               "scenario");

    Scenario s;
    if (!doc.contains("command") || !doc["command"].is_string()) {
        throw ValidationError("scenario requires a string 'command'");
    }
    const std::string cmd = doc["command"].get<std::string>();
    const auto it = kCommands.find(cmd);
    if (it == kCommands.end()) {
        std::string valid;
        for (const auto& [name, c] : kCommands) valid += (valid.empty() ? "" : ", ") + name;
        throw ValidationError("unknown command '" + cmd + "'; valid commands: " + valid);
    }
    s.command = it->second;

    if (doc.contains("gas")) {
        const auto& g = doc["gas"];
        check_keys(g, {"kind", "n", "R", "a", "b"}, "gas");
        const std::string kind = g.contains("kind") ? g["kind"].get<std::string>() : "ideal";
        s.gas = gas::make_gas(gas::gas_kind_from_string(kind), number_or(g, "n", 3.0, "gas"),
                              number_or(g, "R", 1.0, "gas"), number_or(g, "a", 0.0, "gas"),
                              number_or(g, "b", 0.0, "gas"));
    }
    if (doc.contains("budget")) {
        check_keys(doc["budget"], {"delta"}, "budget");
        const double delta = number(doc["budget"], "delta", "budget");
        if (!(delta > 0.0)) throw ValidationError("budget.delta must be positive");
        s.budget.delta = delta;
    }
    if (doc.contains("output_path")) {
        if (!doc["output_path"].is_string()) throw ValidationError("output_path must be a string");
        s.output_path = doc["output_path"].get<std::string>();
    }
    s.tolerances = kDefaultTolerances;
    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        check_keys(t, {"flow", "shoot", "maxent"}, "tolerances");
        for (const auto& [key, value] : t.items()) {
            const double v = number(t, key, "tolerances");
            if (!(v > 0.0)) throw ValidationError("tolerances." + key + " must be positive");
            s.tolerances[key] = v;
        }
    }
    if (doc.contains("endpoints")) {
        const auto& e = doc["endpoints"];
        check_keys(e, {"start", "end", "t0"}, "endpoints");
        if (!e.contains("start") || !e.contains("end")) throw ValidationError("endpoints require 'start' and 'end'");
        const auto a = pair_of(e["start"], "endpoints.start");
        const auto b = pair_of(e["end"], "endpoints.end");
        Endpoints ep{{a[0], a[1]}, {b[0], b[1]}, number_or(e, "t0", 1.0, "endpoints")};
        if (!(ep.t0 > 0.0)) throw ValidationError("endpoints.t0 must be positive");
        for (const auto& x : {ep.start, ep.end}) {
            if (!(x.e > 0.0) || !(x.v > 0.0)) throw ValidationError("endpoint energies and volumes must be positive");
        }
        s.endpoints = ep;
    }
    if (doc.contains("levels")) {
        const auto& l = doc["levels"];
        check_keys(l, {"h1", "h2"}, "levels");
        s.levels = angles::InvariantLevels{number(l, "h1", "levels"), number(l, "h2", "levels")};
        if (!(s.levels->h1 > 0.0)) throw ValidationError("levels.h1 must be positive");
    }
    if (doc.contains("measurement")) {
        const auto& m = doc["measurement"];
        check_keys(m, {"base_probs", "values", "target"}, "measurement");
        for (const char* key : {"base_probs", "values", "target"}) {
            if (!m.contains(key)) throw ValidationError(std::string("measurement requires '") + key + "'");
        }
        Measurement meas;
        meas.base_probs = numbers(m["base_probs"], "measurement.base_probs");
        if (!m["values"].is_array()) throw ValidationError("measurement.values must be an array of arrays");
        for (const auto& row : m["values"]) meas.values.push_back(numbers(row, "measurement.values[]"));
        meas.target = numbers(m["target"], "measurement.target");
        s.measurement = meas;
    }
    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        if (s.command == Command::Applicability) {
            check_keys(g, {"T", "v"}, "grid");
            if (!g.contains("T") || !g.contains("v")) throw ValidationError(schema_hint(s.command));
            s.grid = std::array<Axis, 2>{axis_of(g["T"], "grid.T"), axis_of(g["v"], "grid.v")};
            if (!(s.grid->at(0).lo > 0.0) || !(s.grid->at(1).lo > 0.0)) {
                throw ValidationError("grid.T and grid.v must be positive");
            }
        } else {
            check_keys(g, {"h1", "h2"}, "grid");
            if (!g.contains("h1") || !g.contains("h2")) throw ValidationError(schema_hint(s.command));
            s.grid = std::array<Axis, 2>{axis_of(g["h1"], "grid.h1"), axis_of(g["h2"], "grid.h2")};
        }
    }
    if (doc.contains("start")) {
        const auto xs = numbers(doc["start"], "start");
        if (xs.size() != 4) throw ValidationError("start must be [q1, q2, l1, l2]");
        if (!(xs[0] > 0.0)) throw ValidationError("start q1 must be positive");
        s.start = control::PhasePoint{xs[0], xs[1], xs[2], xs[3]};
    }
    if (doc.contains("t")) {
        s.t = number(doc, "t", "scenario");
        if (!(s.t > 0.0)) throw ValidationError("t must be positive");
    }
    if (doc.contains("virial")) {
        const auto& v = doc["virial"];
        check_keys(v, {"direction", "eps", "points"}, "virial");
        if (v.contains("direction")) s.virial.direction = pair_of(v["direction"], "virial.direction");
        if (v.contains("eps")) s.virial.eps = numbers(v["eps"], "virial.eps");
        if (v.contains("points")) s.virial.points = static_cast<int>(number(v, "points", "virial"));
        if (s.virial.points < 1) throw ValidationError("virial.points must be positive");
    }

    bool ok = true;
    switch (s.command) {
    case Command::Maxent: ok = s.measurement.has_value(); break;
    case Command::Applicability: ok = s.grid.has_value(); break;
    case Command::Solve: ok = s.endpoints.has_value(); break;
    case Command::Angles: ok = s.start.has_value() && doc.contains("t"); break;
    case Command::Components: ok = s.grid.has_value() || s.levels.has_value(); break;
    case Command::VirialCheck: ok = s.levels.has_value(); break;
    }
    if (!ok) throw ValidationError("missing required fields: " + schema_hint(s.command));
    if (s.command == Command::Solve || s.command == Command::Angles || s.command == Command::Components ||
        s.command == Command::VirialCheck) {
        require_ideal(s);
    }
    return s;
}

RunOutput run(const Scenario& s)
{
    try {
        switch (s.command) {
        case Command::Maxent: return run_maxent(s);
        case Command::Applicability: return run_applicability(s);
        case Command::Solve: return run_solve(s);
        case Command::Angles: return run_angles(s);
        case Command::Components: return run_components(s);
        case Command::VirialCheck: return run_virial(s);
        }
    } catch (const ValidationError& ex) {
        return failure(3, ex.what());
    } catch (const DomainError& ex) {
        return failure(3, ex.what());
    } catch (const std::exception& ex) {
        return failure(2, ex.what());
    }
    return failure(3, "unhandled command");
}

int run_file(const std::string& path, const std::string& out, bool quiet)
{
    auto log = [quiet](const std::string& line) {
        if (!quiet) std::cerr << "thermopt: " << line << '\n';
    };
    auto emit = [](const std::string& file, const std::string& content) {
        std::ofstream f(file, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + file);
        f << content;
    };

    std::string prefix = out;
    RunOutput result;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        result = failure(3, "cannot read scenario file " + path);
    } else {
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            const Scenario s = parse_scenario(buf.str());
            if (prefix.empty()) prefix = s.output_path;
            log("running " + to_string(s.command));
            result = run(s);
        } catch (const std::exception& ex) {
            result = failure(3, ex.what());
        }
    }
    std::cout << result.json;
    if (!prefix.empty()) {
        try {
            emit(prefix + ".json", result.json);
            log("wrote " + prefix + ".json");
            if (!result.csv.empty()) {
                emit(prefix + ".csv", result.csv);
                log("wrote " + prefix + ".csv");
            }
        } catch (const std::exception& ex) {
            std::cerr << "thermopt: " << ex.what() << '\n';
            return result.exit_code == 0 ? 2 : result.exit_code;
        }
    }
    if (result.exit_code != 0) log("failed with exit code " + std::to_string(result.exit_code));
    return result.exit_code;
}

} // namespace thermopt::cli
