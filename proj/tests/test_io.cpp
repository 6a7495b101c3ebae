#include <gtest/gtest.h>

#include <sstream>

#include "phaselab/io.hpp"

using namespace phaselab;

TEST(Io, CsvSeventeenDigits) {
    Table t;
    t.columns = {"a", "b"};
    t.add({0.1, 1.0 / 3.0});
    t.add({NAN, -2.0});
    std::ostringstream os;
    write_csv(os, t);
    EXPECT_EQ(os.str(), "a,b\n0.10000000000000001,0.33333333333333331\nnan,-2\n");
    EXPECT_THROW(t.add({1.0}), DomainError);
}

TEST(Io, CsvRoundTrip) {
    for (double v : {M_PI, 1e-300, -6.02214076e23, 0.1 + 0.2}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Io, TableColumn) {
    Table t;
    t.columns = {"x", "y"};
    t.add({1, 2});
    t.add({3, 4});
    EXPECT_EQ(t.column("y"), (std::vector<double>{2, 4}));
    EXPECT_THROW(t.column("z"), DomainError);
}

TEST(Io, SvgStyles) {
    Plot p;
    p.title = "a < b";
    Series s;
    s.name = "solid";
    s.x = {0, 1, NAN, 2, 3};
    s.y = {0, 1, NAN, 1, 0};
    Series d = s;
    d.name = "dashed";
    d.dashed = true;
    p.series = {s, d};
    auto svg = render_svg(p);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
    EXPECT_NE(svg.find("a &lt; b"), std::string::npos);
    // NaN splits each series into two polylines
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++count;
        ++pos;
    }
    EXPECT_EQ(count, 4u);
}
