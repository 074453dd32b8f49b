#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "helpers.hpp"

using namespace tdp;

namespace {

const char* kTiny = R"({
  "instances": [
    {"name": "pad0", "kind": "IO", "fixed": true, "x": 0, "y": 3},
    {"name": "a", "kind": "LUT"},
    {"name": "r1", "kind": "FF", "clock": "clk0"},
    {"name": "r2", "kind": "FF", "clock": "clk1"}
  ],
  "nets": [
    {"name": "n_in", "driver": {"inst": "pad0"}, "loads": [{"inst": "a", "offset": [0.25, 0]}]},
    {"name": "n_mid", "driver": {"inst": "a"}, "loads": [{"inst": "r1"}, {"inst": "r2"}]}
  ]
})";

} // namespace

TEST_CASE("kind names round-trip", "[netlist]") {
    for (int i = 0; i < kNumInstanceKinds; i++) {
        auto k = static_cast<InstanceKind>(i);
        auto back = kind_from_name(kind_name(k));
        REQUIRE(back.has_value());
        CHECK(*back == k);
    }
    CHECK_FALSE(kind_from_name("FLIPFLOP").has_value());
    CHECK_FALSE(kind_from_name("lut").has_value());
}

TEST_CASE("sequential defaults", "[netlist]") {
    CHECK(default_sequential(InstanceKind::FF));
    CHECK(default_sequential(InstanceKind::RAMB));
    CHECK(default_sequential(InstanceKind::DSP));
    CHECK(default_sequential(InstanceKind::IO));
    CHECK_FALSE(default_sequential(InstanceKind::LUT));
    CHECK_FALSE(default_sequential(InstanceKind::MUX));
    CHECK_FALSE(default_sequential(InstanceKind::ClockBuffer));
    CHECK_FALSE(default_sequential(InstanceKind::CARRY8));
}

TEST_CASE("parse a small netlist", "[netlist]") {
    Netlist nl = tt::nl_from_json(kTiny);
    REQUIRE(nl.instances.size() == 4);
    REQUIRE(nl.nets.size() == 2);

    const Instance& pad = nl.instances[nl.inst_index("pad0")];
    CHECK(pad.kind == InstanceKind::IO);
    CHECK(pad.fixed);
    CHECK(pad.has_pos);
    CHECK(pad.x == 0.0);
    CHECK(pad.y == 3.0);
    CHECK(pad.sequential); // IO is a timing endpoint

    const Instance& a = nl.instances[nl.inst_index("a")];
    CHECK_FALSE(a.fixed);
    CHECK_FALSE(a.has_pos);
    CHECK(a.clock == -1);

    // clock labels are interned in first-seen order
    REQUIRE(nl.clocks.size() == 2);
    CHECK(nl.clocks[0] == "clk0");
    CHECK(nl.clocks[1] == "clk1");
    CHECK(nl.instances[nl.inst_index("r1")].clock == 0);
    CHECK(nl.instances[nl.inst_index("r2")].clock == 1);

    const Net& mid = nl.nets[1];
    CHECK(mid.driver.inst == nl.inst_index("a"));
    REQUIRE(mid.loads.size() == 2);
    CHECK(mid.pin_count() == 3);

    const Net& in = nl.nets[0];
    CHECK(in.loads[0].dx == 0.25);
    CHECK(in.loads[0].dy == 0.0);
}

TEST_CASE("parse rejects malformed netlists", "[netlist]") {
    auto bad = [](const std::string& s) {
        std::istringstream in(s);
        REQUIRE_THROWS_AS(parse_netlist(in), ValidationError);
    };
    bad("not json");
    bad(R"({"instances": []})"); // missing nets
    bad(R"({"instances": [{"name":"a","kind":"LUT"},{"name":"a","kind":"FF"}], "nets": []})");
    bad(R"({"instances": [{"name":"a","kind":"XOR9"}], "nets": []})");
    bad(R"({"instances": [{"name":"a","kind":"LUT","x":1}], "nets": []})"); // x without y
    bad(R"({"instances": [{"name":"a","kind":"LUT"}],
            "nets": [{"name":"n","driver":{"inst":"ghost"}}]})");
    bad(R"({"instances": [{"name":"a","kind":"LUT"},{"name":"b","kind":"LUT"}],
            "nets": [{"name":"n","driver":[{"inst":"a"},{"inst":"b"}]}]})");
    bad(R"({"instances": [{"name":"a","kind":"LUT"}],
            "nets": [{"name":"n","loads":[{"inst":"a"}]}]})"); // no driver
    bad(R"({"instances": [{"name":"a","kind":"LUT"}],
            "nets": [{"name":"n","driver":{"inst":"a"}},
                     {"name":"n","driver":{"inst":"a"}}]})"); // duplicate net
}

TEST_CASE("netlist serialization is canonical", "[netlist]") {
    Netlist nl = tt::nl_from_json(kTiny);
    std::string once = serialize_netlist(nl);
    Netlist again = tt::nl_from_json(once);
    CHECK(serialize_netlist(again) == once);
    CHECK(again.instances.size() == nl.instances.size());
    CHECK(again.clocks == nl.clocks);
}

TEST_CASE("device parse and serialize", "[netlist]") {
    Device dev = tt::small_device();
    CHECK(dev.width == 64);
    CHECK(dev.height == 64);
    CHECK(dev.cr_rows == 2);
    CHECK(dev.cr_cols == 4);
    CHECK(dev.clock_capacity == 24);
    REQUIRE(dev.capacity.count(InstanceKind::LUT));
    CHECK(dev.capacity.at(InstanceKind::LUT) == 8.0);
    CHECK_FALSE(dev.capacity.count(InstanceKind::DSP)); // absent = unconstrained

    std::string text = serialize_device(dev);
    Device back = tt::dev_from_json(text);
    CHECK(serialize_device(back) == text);
}

TEST_CASE("device parse rejects bad geometry", "[netlist]") {
    auto bad = [](const std::string& s) {
        std::istringstream in(s);
        REQUIRE_THROWS_AS(parse_device(in), ValidationError);
    };
    bad(R"({"width": 0, "height": 4})");
    bad(R"({"width": 10, "height": 10, "clock_regions": {"rows": 3, "cols": 1}})"); // no tile
    bad(R"({"width": 8, "height": 8, "capacity": {"BOGUS": 1}})");
    bad(R"({"width": 8, "height": 8, "capacity": {"LUT": -1}})");
    bad(R"({"width": 8, "height": 8, "clock_capacity": 0})");
}

TEST_CASE("clock regions tile the die", "[netlist]") {
    Device dev = tt::small_device();
    // every site lands in exactly the region whose rect contains it
    for (int x = 0; x < dev.width; x++)
        for (int y = 0; y < dev.height; y++) {
            int r = dev.clock_region_of(x + 0.5, y + 0.5);
            REQUIRE(r >= 0);
            REQUIRE(r < dev.clock_region_count());
            auto b = dev.clock_region_bounds(r);
            CHECK(x + 0.5 >= b.x0);
            CHECK(x + 0.5 < b.x1);
            CHECK(y + 0.5 >= b.y0);
            CHECK(y + 0.5 < b.y1);
        }
    // out-of-die coordinates clamp instead of indexing out of range
    CHECK(dev.clock_region_of(-5.0, -5.0) == 0);
    CHECK(dev.clock_region_of(1e9, 1e9) == dev.clock_region_count() - 1);
}

TEST_CASE("hpwl matches the rectangle of pin positions", "[netlist]") {
    Netlist nl = tt::nl_from_json(kTiny);
    PlacementState pl;
    pl.resize(nl.instances.size());
    pl.x = {0.0, 2.0, 7.0, 4.0};
    pl.y = {3.0, 1.0, 5.0, 2.0};

    // n_in: driver pad0 at (0,3), load a at (2+0.25, 1)
    CHECK(net_hpwl_x(nl.nets[0], pl) == Catch::Approx(2.25));
    CHECK(net_hpwl_y(nl.nets[0], pl) == Catch::Approx(2.0));
    // n_mid: pins at x {2,7,4}, y {1,5,2}
    CHECK(net_hpwl(nl.nets[1], pl) == Catch::Approx(5.0 + 4.0));
    CHECK(total_hpwl(nl, pl) == Catch::Approx(2.25 + 2.0 + 9.0));
}

TEST_CASE("placement serialization merges by name", "[netlist]") {
    Netlist nl = tt::nl_from_json(kTiny);
    PlacementState pl;
    pl.resize(nl.instances.size());
    for (size_t i = 0; i < pl.size(); i++) {
        pl.x[i] = 1.5 * double(i);
        pl.y[i] = 10.0 - double(i);
    }
    tt::TempDir td("placement");
    {
        std::ofstream f(td.file("p.json"));
        f << serialize_placement(nl, pl);
    }
    PlacementState back = load_placement_file(td.file("p.json"), nl);
    for (size_t i = 0; i < pl.size(); i++) {
        CHECK(back.x[i] == pl.x[i]);
        CHECK(back.y[i] == pl.y[i]);
    }
}

TEST_CASE("partial placement files keep source coordinates", "[netlist]") {
    Netlist nl = tt::nl_from_json(kTiny);
    tt::TempDir td("partial");
    {
        std::ofstream f(td.file("p.json"));
        f << R"({"placements": [{"inst": "a", "x": 9.0, "y": 8.0}]})";
    }
    PlacementState pl = load_placement_file(td.file("p.json"), nl);
    CHECK(pl.x[nl.inst_index("a")] == 9.0);
    CHECK(pl.x[nl.inst_index("pad0")] == 0.0); // from the netlist file
    CHECK(pl.y[nl.inst_index("pad0")] == 3.0);

    std::ofstream(td.file("bad.json")) << R"({"placements": [{"inst": "nope", "x": 1, "y": 1}]})";
    REQUIRE_THROWS_AS(load_placement_file(td.file("bad.json"), nl), ValidationError);
}

TEST_CASE("initial placement jitters movables around the center", "[netlist]") {
    Netlist nl = tt::nl_from_json(kTiny);
    Device dev = tt::small_device();
    PlacementState pl = initial_placement(nl, dev, 7);

    int pad = nl.inst_index("pad0");
    CHECK(pl.x[pad] == 0.0);
    CHECK(pl.y[pad] == 3.0);

    double span = 0.05 * 64.0;
    for (const Instance& inst : nl.instances) {
        if (inst.has_pos) continue;
        CHECK(std::abs(pl.x[inst.id] - 32.0) <= span);
        CHECK(std::abs(pl.y[inst.id] - 32.0) <= span);
    }

    PlacementState same = initial_placement(nl, dev, 7);
    CHECK(same.x == pl.x);
    CHECK(same.y == pl.y);
    PlacementState other = initial_placement(nl, dev, 8);
    CHECK(other.x != pl.x);
}

TEST_CASE("validate flags capacity and structure problems", "[netlist]") {
    Device tiny = tt::dev_from_json(R"({"width": 2, "height": 2, "capacity": {"LUT": 1}})");

    tt::Builder b;
    for (int i = 0; i < 5; i++) b.inst("l" + std::to_string(i), InstanceKind::LUT);
    auto vs = validate(b.nl, tiny); // 5 LUTs vs 4 sites
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].code == "capacity");

    tt::Builder ok;
    ok.inst("l0", InstanceKind::LUT);
    CHECK(validate(ok.nl, tiny).empty());

    tt::Builder fx;
    int id = fx.inst("l0", InstanceKind::LUT);
    fx.nl.instances[id].fixed = true;
    fx.nl.instances[id].has_pos = false;
    auto vs2 = validate(fx.nl, tiny);
    REQUIRE(vs2.size() == 1);
    CHECK(vs2[0].code == "unplaced-fixed");
}

TEST_CASE("validate finds combinational cycles", "[netlist]") {
    Device dev = tt::small_device();

    tt::Builder b;
    int a = b.inst("a", InstanceKind::LUT);
    int c = b.inst("c", InstanceKind::LUT);
    int d = b.inst("d", InstanceKind::LUT);
    b.net("n0", a, {c});
    b.net("n1", c, {d});
    b.net("n2", d, {a});
    auto vs = validate(b.nl, dev);
    REQUIRE_FALSE(vs.empty());
    CHECK(vs[0].code == "comb-cycle");

    // the same loop broken by a register is fine
    tt::Builder ok;
    int a2 = ok.inst("a", InstanceKind::LUT);
    int c2 = ok.inst("c", InstanceKind::LUT);
    int r = ok.inst("r", InstanceKind::FF);
    ok.net("n0", a2, {c2});
    ok.net("n1", c2, {r});
    ok.net("n2", r, {a2});
    CHECK(validate(ok.nl, dev).empty());
}
