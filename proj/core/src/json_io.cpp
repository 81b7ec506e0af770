#include "thermopt/io.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>

#include "thermopt/errors.hpp"

namespace thermopt::io {

using nlohmann::json;

namespace {

json parse(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("json: ") + ex.what());
    }
}

template <typename T>
T field(const json& j, const char* key)
{
    if (!j.contains(key)) throw ValidationError(std::string("json: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("json: field '") + key + "': " + ex.what());
    }
}

} // namespace

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string gas_spec_to_json(const gas::GasSpec& spec)
{
    json j = {{"kind", gas::to_string(spec.kind)}, {"n", spec.n}, {"R", spec.R}, {"a", spec.a}, {"b", spec.b}};
    return j.dump();
}

gas::GasSpec gas_spec_from_json(const std::string& text)
{
    const json j = parse(text);
    return gas::make_gas(gas::gas_kind_from_string(field<std::string>(j, "kind")), field<double>(j, "n"),
                         field<double>(j, "R"), field<double>(j, "a"), field<double>(j, "b"));
}

std::string maxent_solution_to_json(const maxent::MaxEntSolution& s)
{
    std::vector<double> lambda(s.lambda.data(), s.lambda.data() + s.lambda.size());
    json j = {{"lambda", lambda}, {"density", s.density}, {"info_gain", s.info_gain}};
    return j.dump();
}

maxent::MaxEntSolution maxent_solution_from_json(const std::string& text)
{
    const json j = parse(text);
    maxent::MaxEntSolution s;
    const auto lambda = field<std::vector<double>>(j, "lambda");
    s.lambda = Eigen::Map<const Eigen::VectorXd>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
    s.density = field<std::vector<double>>(j, "density");
    s.info_gain = field<double>(j, "info_gain");
    return s;
}

std::string component_report_to_json(const ComponentReport& r)
{
    json j = {{"levels", {{"h1", r.h1}, {"h2", r.h2}}}, {"roots", r.roots}, {"components", r.components}};
    return j.dump();
}

ComponentReport component_report_from_json(const std::string& text)
{
    const json j = parse(text);
    ComponentReport r;
    const json levels = field<json>(j, "levels");
    r.h1 = field<double>(levels, "h1");
    r.h2 = field<double>(levels, "h2");
    r.roots = field<std::vector<double>>(j, "roots");
    r.components = field<int>(j, "components");
    if (r.components != 2 && r.components != 3) throw ValidationError("json: components must be 2 or 3");
    return r;
}

std::string order_report_to_json(const OrderReport& r)
{
    json j = {{"direction", r.direction},
              {"eps", r.eps},
              {"bracket_norms", r.bracket_norms},
              {"slope", r.slope},
              {"floor_limited", r.floor_limited}};
    return j.dump();
}

OrderReport order_report_from_json(const std::string& text)
{
    const json j = parse(text);
    OrderReport r;
    r.direction = field<std::vector<double>>(j, "direction");
    r.eps = field<std::vector<double>>(j, "eps");
    r.bracket_norms = field<std::vector<double>>(j, "bracket_norms");
    r.slope = field<double>(j, "slope");
    r.floor_limited = j.value("floor_limited", false);
    if (r.eps.size() != r.bracket_norms.size()) throw ValidationError("json: eps and bracket_norms differ in length");
    return r;
}

} // namespace thermopt::io
