#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "thermopt/errors.hpp"
#include "thermopt/io.hpp"

using namespace thermopt;
using namespace thermopt::io;

TEST_CASE("shortest round-trip number format")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    for (double x : {1.0 / 3.0, M_PI, 6.02214076e23, 4.9e-324}) {
        const auto s = format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
        CHECK(s.size() <= 24);
    }
}

TEST_CASE("gas spec JSON")
{
    const auto g = gas::make_gas(gas::GasKind::VanDerWaals, 5, 8.314, 0.1, 0.03);
    const auto back = gas_spec_from_json(gas_spec_to_json(g));
    CHECK(back.kind == g.kind);
    CHECK(back.n == g.n);
    CHECK(back.R == g.R);
    CHECK(back.a == g.a);
    CHECK(back.b == g.b);
    CHECK_THROWS_AS(gas_spec_from_json("{\"kind\":\"ideal\"}"), ValidationError);
    CHECK_THROWS_AS(gas_spec_from_json("not json"), ValidationError);
}

TEST_CASE("maxent solution JSON")
{
    maxent::MaxEntSolution s;
    s.lambda = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
    s.density = {0.5, 1.5};
    s.info_gain = 0.125;
    const auto text = maxent_solution_to_json(s);
    CHECK(text.find("\"lambda\"") != std::string::npos);
    const auto back = maxent_solution_from_json(text);
    CHECK(back.lambda == s.lambda);
    CHECK(back.density == s.density);
    CHECK(back.info_gain == s.info_gain);
}

TEST_CASE("component and order reports")
{
    ComponentReport c{0.5, -1.25, {0.3, 0.9}, 3};
    const auto cb = component_report_from_json(component_report_to_json(c));
    CHECK(cb.h1 == c.h1);
    CHECK(cb.h2 == c.h2);
    CHECK(cb.roots == c.roots);
    CHECK(cb.components == 3);
    CHECK_THROWS_AS(component_report_from_json(R"({"levels":{"h1":1,"h2":0},"roots":[],"components":4})"),
                    ValidationError);

    OrderReport o{{0.6, 0.8}, {1e-2, 1e-3}, {1e-4, 1e-6}, 2.0, false};
    const auto ob = order_report_from_json(order_report_to_json(o));
    CHECK(ob.direction == o.direction);
    CHECK(ob.eps == o.eps);
    CHECK(ob.bracket_norms == o.bracket_norms);
    CHECK(ob.slope == o.slope);
}
