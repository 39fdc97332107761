#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridfold/geo.hpp"
#include "gridfold/network.hpp"
#include "gridfold/network_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace gridfold;

namespace {

Network two_bus_net() {
    Network net;
    net.buses = {{"a", {37.0, -120.0}, true, 230.0}, {"b", {37.5, -120.5}, false, 230.0}};
    Branch br;
    br.id = "l1";
    br.from_bus = "a";
    br.to_bus = "b";
    br.r = 0.01;
    br.x = 0.1;
    br.rating = 10.0;
    net.branches.push_back(br);
    return net;
}

Network fourbus() { return load_network(std::filesystem::path(FIXTURE_DIR) / "fourbus.json"); }

} // namespace

TEST_CASE("haversine: identical points and poles") {
    CHECK(haversine_distance({0.0, 0.0}, {0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(haversine_distance({90.0, 0.0}, {90.0, 179.0}) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("haversine: one degree of longitude at the equator") {
    // R * pi / 180 with R = 6371.0 km, evaluated by hand.
    CHECK(haversine_distance({0.0, 0.0}, {0.0, 1.0}) == doctest::Approx(111.195).epsilon(1e-3 / 111.195));
}

TEST_CASE("haversine: symmetry and triangle inequality on random triples") {
    std::mt19937_64 rng(12345);
    auto coord = [&]() {
        const double lat = -90.0 + 180.0 * (rng() >> 11) * 0x1.0p-53;
        const double lon = -180.0 + 360.0 * (rng() >> 11) * 0x1.0p-53;
        return GeoCoord{lat, lon};
    };
    for (int k = 0; k < 200; ++k) {
        const GeoCoord a = coord(), b = coord(), c = coord();
        const double ab = haversine_distance(a, b);
        const double ba = haversine_distance(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab >= 0.0);
        const double ac = haversine_distance(a, c);
        const double cb = haversine_distance(c, b);
        CHECK(ab <= (ac + cb) * (1.0 + 1e-9) + 1e-9);
    }
}

TEST_CASE("bus_degree counts lines and transformers") {
    Network net = fourbus();
    CHECK(bus_degree(net, "b2") == 3);
    CHECK(bus_degree(net, "b4") == 1); // endpoint of the single radial line
    CHECK(bus_degree(net, "b1") == 2); // line A plus transformer X1

    net.buses.push_back({"iso", {36.0, -119.0}, false, 230.0});
    CHECK(bus_degree(net, "iso") == 0);
    CHECK_THROWS_AS(bus_degree(net, "nope"), Error);
}

TEST_CASE("sum of degrees equals twice the branch count") {
    const Network net = fourbus();
    int total = 0;
    for (const auto& b : net.buses) total += bus_degree(net, b.id);
    CHECK(total == 2 * static_cast<int>(net.branches.size()));
}

TEST_CASE("radial_lines: ring has none") {
    Network net;
    for (int i = 0; i < 4; ++i)
        net.buses.push_back({"n" + std::to_string(i), {37.0 + 0.01 * i, -120.0}, false, 230.0});
    for (int i = 0; i < 4; ++i) {
        Branch br;
        br.id = "r" + std::to_string(i);
        br.from_bus = "n" + std::to_string(i);
        br.to_bus = "n" + std::to_string((i + 1) % 4);
        br.r = 0.01;
        br.x = 0.1;
        br.rating = 5.0;
        net.branches.push_back(br);
    }
    CHECK(radial_lines(net).empty());
}

TEST_CASE("radial_lines: the four-bus fixture has exactly line B") {
    const auto radial = radial_lines(fourbus());
    REQUIRE(radial.size() == 1);
    CHECK(radial[0] == "B");
}

TEST_CASE("radial_lines: star of three leaves lists all lines, never transformers") {
    Network net;
    net.buses = {{"hub", {37.0, -120.0}, true, 230.0},
                 {"l1", {37.01, -120.0}, false, 230.0},
                 {"l2", {37.0, -120.01}, false, 230.0},
                 {"l3", {36.99, -120.0}, false, 230.0},
                 {"t1", {37.0, -119.99}, false, 115.0}};
    for (int i = 1; i <= 3; ++i) {
        Branch br;
        br.id = "s" + std::to_string(i);
        br.from_bus = "hub";
        br.to_bus = "l" + std::to_string(i);
        br.r = 0.01;
        br.x = 0.1;
        br.rating = 5.0;
        net.branches.push_back(br);
    }
    Branch xf;
    xf.id = "x1";
    xf.from_bus = "hub";
    xf.to_bus = "t1";
    xf.kind = BranchKind::transformer;
    xf.r = 0.005;
    xf.x = 0.05;
    xf.rating = 8.0;
    net.branches.push_back(xf);

    const auto radial = radial_lines(net);
    CHECK(radial == std::vector<std::string>{"s1", "s2", "s3"});
}

TEST_CASE("validate: well-formed two-bus network is clean") {
    CHECK(validate_network(two_bus_net()).ok());
}

TEST_CASE("validate: dangling branch reference names branch and bus") {
    Network net = two_bus_net();
    net.branches[0].to_bus = "ghost";
    const auto rep = validate_network(net);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& v : rep.items)
        if (v.message.find("l1") != std::string::npos &&
            v.message.find("ghost") != std::string::npos)
            found = true;
    CHECK(found);
}

TEST_CASE("validate: zero reactance is an error") {
    Network net = two_bus_net();
    net.branches[0].x = 0.0;
    const auto rep = validate_network(net);
    CHECK(rep.error_count() == 1);
    CHECK(rep.items[0].code == "nonpositive-x");
}

TEST_CASE("validate: duplicate ids and disconnected warning") {
    Network net = two_bus_net();
    net.buses.push_back({"island", {38.0, -121.0}, false, 230.0});
    net.generators.push_back({"g1", "a", "NG", 5.0, 30.0, false, "", false});
    net.generators.push_back({"g1", "b", "NG", 5.0, 30.0, false, "", false});
    const auto rep = validate_network(net);
    CHECK_FALSE(rep.ok());
    bool dup = false, disc = false;
    for (const auto& v : rep.items) {
        if (v.code == "duplicate-id") dup = true;
        if (v.code == "disconnected" && v.severity == Violation::Severity::warning) disc = true;
    }
    CHECK(dup);
    CHECK(disc);
}

TEST_CASE("network file: save/load round trip is the identity") {
    Network net = fourbus();
    const auto path = std::filesystem::temp_directory_path() / "gridfold_roundtrip.json";
    save_network(net, path);
    const Network back = load_network(path);
    CHECK(back == net);
    std::filesystem::remove(path);
}

TEST_CASE("network file: missing rating names the branch") {
    const char* text = R"({
      "format": 1,
      "buses": [
        {"id": "a", "location": {"latitude": 0.0, "longitude": 0.0}, "base_kv": 230.0},
        {"id": "b", "location": {"latitude": 0.5, "longitude": 0.0}, "base_kv": 230.0}
      ],
      "branches": [{"id": "bad7", "from_bus": "a", "to_bus": "b", "kind": "line", "r": 0.01, "x": 0.1}],
      "generators": [], "storage": [], "loads": [], "candidates": []
    })";
    try {
        network_from_json_text(text, "inline");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("rating") != std::string::npos);
        CHECK(msg.find("bad7") != std::string::npos);
    }
}

TEST_CASE("network file: format header is required") {
    CHECK_THROWS_AS(network_from_json_text(R"({"buses": []})", "inline"), Error);
    CHECK_THROWS_AS(network_from_json_text("{ not json", "inline"), Error);
}

TEST_CASE("network file: four-bus fixture loads with 4 buses and 3 lines") {
    const Network net = fourbus();
    CHECK(net.buses.size() == 4);
    int lines = 0;
    for (const auto& br : net.branches)
        if (br.kind == BranchKind::line) ++lines;
    CHECK(lines == 3);
}

TEST_CASE("load_network rejects files failing validation") {
    const auto path = std::filesystem::temp_directory_path() / "gridfold_invalid.json";
    Network net = two_bus_net();
    net.branches[0].x = 0.0;
    {
        std::ofstream out(path);
        out << network_to_json_text(net);
    }
    CHECK_THROWS_AS(load_network(path), Error);
    std::filesystem::remove(path);
}
