#include <doctest.h>

#include <cmath>

#include "faultloc/errors.hpp"
#include "faultloc/io.hpp"
#include "faultloc/network.hpp"
#include "faultloc/rng.hpp"
#include "faultloc/stacking.hpp"

#include "test_util.hpp"

using namespace faultloc;

namespace {

const char* kTwoBusDoc = R"({
  "buses": [
    {"id": 1, "shunt_admittance": {"re": 0.002, "im": -0.04}},
    {"id": 2, "shunt_admittance": {"re": 0.0, "im": 0.0}}
  ],
  "lines": [
    {"id": "L1-2", "from": 1, "to": 2, "z": {"re": 290.0, "im": -28.0},
     "gamma": {"re": 3.0e-05, "im": 0.00105}, "length_km": 100.0}
  ]
})";

}  // namespace

TEST_CASE("load_network accepts the smallest valid document") {
  const Network net = load_network(kTwoBusDoc);
  CHECK(net.bus_count() == 2);
  CHECK(net.lines().size() == 1);
  CHECK(net.bus_index(1) == 0);
  CHECK(net.bus_index(2) == 1);
  CHECK(net.ybus_rcond() > 1e-12);
}

TEST_CASE("load_network rejects invalid documents") {
  SUBCASE("zero line length") {
    std::string doc = kTwoBusDoc;
    doc.replace(doc.find("\"length_km\": 100.0"), 18, "\"length_km\": 0.0");
    CHECK_THROWS_WITH_AS(load_network(doc), doctest::Contains("length must be positive"),
                         ValidationError);
  }
  SUBCASE("duplicate bus id") {
    std::string doc = kTwoBusDoc;
    doc.replace(doc.find("\"id\": 2"), 7, "\"id\": 1");
    CHECK_THROWS_WITH_AS(load_network(doc), doctest::Contains("duplicate bus id 1"),
                         ValidationError);
  }
  SUBCASE("disconnected graph") {
    const char* doc = R"({
      "buses": [
        {"id": 1, "shunt_admittance": {"re": 0.002, "im": -0.04}},
        {"id": 2}, {"id": 3}
      ],
      "lines": [
        {"id": "L1-2", "from": 1, "to": 2, "z": {"re": 290.0, "im": -28.0},
         "gamma": {"re": 3.0e-05, "im": 0.00105}, "length_km": 100.0}
      ]
    })";
    CHECK_THROWS_WITH_AS(load_network(doc), doctest::Contains("disconnected"), ValidationError);
  }
  SUBCASE("all shunts zero") {
    std::string doc = kTwoBusDoc;
    doc.replace(doc.find("{\"re\": 0.002, \"im\": -0.04}"), 26, "{\"re\": 0.0, \"im\": 0.00}");
    CHECK_THROWS_WITH_AS(load_network(doc), doctest::Contains("nonzero shunt_admittance"),
                         ValidationError);
  }
  SUBCASE("negative attenuation") {
    std::string doc = kTwoBusDoc;
    doc.replace(doc.find("\"re\": 3.0e-05"), 13, "\"re\": -3.0e-5");
    CHECK_THROWS_WITH_AS(load_network(doc), doctest::Contains("Re >= 0"), ValidationError);
  }
  SUBCASE("malformed json") {
    CHECK_THROWS_AS(load_network("{"), ValidationError);
  }
  SUBCASE("duplicate line id") {
    const char* doc = R"({
      "buses": [{"id": 1, "shunt_admittance": {"re": 0.002, "im": -0.04}}, {"id": 2}],
      "lines": [
        {"id": "L", "from": 1, "to": 2, "z": {"re": 290.0, "im": -28.0},
         "gamma": {"re": 3.0e-05, "im": 0.00105}, "length_km": 100.0},
        {"id": "L", "from": 2, "to": 1, "z": {"re": 290.0, "im": -28.0},
         "gamma": {"re": 3.0e-05, "im": 0.00105}, "length_km": 50.0}
      ]
    })";
    CHECK_THROWS_WITH_AS(load_network(doc), doctest::Contains("duplicate line id"),
                         ValidationError);
  }
}

TEST_CASE("bundled benchmarks load and validate") {
  const Network b6 = testutil::load_bench6();
  CHECK(b6.bus_count() == 6);
  CHECK(b6.lines().size() == 7);

  const Network b14 = testutil::load_bench14();
  CHECK(b14.bus_count() == 14);
  CHECK(b14.lines().size() == 20);

  const SensorSet s6 = testutil::load_bench6_sensors();
  validate_sensors(b6, s6);
  const SensorSet s14 = testutil::load_bench14_sensors();
  validate_sensors(b14, s14);
}

TEST_CASE("line admittance matches the lumped-pi limit for small gamma*d") {
  Line line{"tiny", 1, 2, {290.0, -28.0}, {5.0e-7, 8.0e-7}, 50.0};
  const Complex gd = line.gamma_d();
  REQUIRE(std::abs(gd) < 1e-4);
  const LineAdmittance adm = line_admittance(line);
  const Complex series_limit = 1.0 / (line.surge_impedance * gd);
  const Complex shunt_limit = gd / (2.0 * line.surge_impedance);
  CHECK(std::abs(adm.series - series_limit) <= 1e-6 * std::abs(series_limit));
  CHECK(std::abs(adm.shunt_terminal - shunt_limit) <= 1e-6 * std::abs(shunt_limit));
}

TEST_CASE("assemble_ybus on isolated buses is diagonal") {
  std::vector<Bus> buses{{1, {0.1, -0.2}}, {2, {0.05, 0.0}}, {3, {0.0, 0.3}}};
  const CMatrix y = assemble_ybus(buses, {});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) {
        CHECK(y(i, j) == buses[i].shunt_admittance);
      } else {
        CHECK(y(i, j) == Complex(0.0, 0.0));
      }
    }
  }
}

TEST_CASE("6-bus ybus matches an independent extended-precision assembly") {
  const Network net = testutil::load_bench6();
  const CMatrix y = build_ybus(net);
  const auto oracle = testutil::oracle_ybus(net);
  const double scale = y.cwiseAbs().maxCoeff();
  for (int i = 0; i < net.bus_count(); ++i) {
    for (int j = 0; j < net.bus_count(); ++j) {
      const Complex expected = testutil::to_double(oracle[i][j]);
      CHECK(std::abs(y(i, j) - expected) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("build_zbus") {
  SUBCASE("diagonal input inverts element-wise") {
    CMatrix y = CMatrix::Zero(3, 3);
    y(0, 0) = {2.0, 0.0};
    y(1, 1) = {0.0, 4.0};
    y(2, 2) = {1.0, -1.0};
    const ZBus z = build_zbus(y);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(z.Z(i, i) - 1.0 / y(i, i)) <= 1e-14 * std::abs(1.0 / y(i, i)));
    }
  }
  SUBCASE("identity inverts to identity") {
    const ZBus z = build_zbus(CMatrix::Identity(4, 4));
    CHECK((z.Z - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("2x2 matches the adjugate formula") {
    CMatrix y(2, 2);
    y << Complex(1.2, -0.4), Complex(-0.3, 0.1), Complex(-0.3, 0.1), Complex(0.9, 0.6);
    const Complex det = y(0, 0) * y(1, 1) - y(0, 1) * y(1, 0);
    const ZBus z = build_zbus(y);
    CHECK(std::abs(z.Z(0, 0) - y(1, 1) / det) <= 1e-13);
    CHECK(std::abs(z.Z(0, 1) + y(0, 1) / det) <= 1e-13);
    CHECK(std::abs(z.Z(1, 0) + y(1, 0) / det) <= 1e-13);
    CHECK(std::abs(z.Z(1, 1) - y(0, 0) / det) <= 1e-13);
  }
  SUBCASE("singular input is rejected") {
    CMatrix y = CMatrix::Zero(2, 2);
    y(0, 0) = {1.0, 0.0};
    CHECK_THROWS_AS(build_zbus(y), NumericalError);
  }
}

TEST_CASE("Z*Y stays within the identity tolerance on both benchmarks") {
  for (const Network& net : {testutil::load_bench6(), testutil::load_bench14()}) {
    const CMatrix y = build_ybus(net);
    const ZBus z = build_zbus(y);
    const double bound = 1e-9 *
                         y.cwiseAbs().rowwise().sum().maxCoeff() *
                         z.Z.cwiseAbs().rowwise().sum().maxCoeff();
    const double residual =
        (z.Z * y - CMatrix::Identity(y.rows(), y.cols())).cwiseAbs().maxCoeff();
    CHECK(residual <= bound);
    const double asym = (z.Z - z.Z.transpose()).cwiseAbs().maxCoeff();
    CHECK(asym <= 1e-9 * z.Z.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("beta_coefficient degenerate cases") {
  const Network net = testutil::make_two_bus();
  const Line& line = net.lines().front();

  SUBCASE("equal terminal impedances reduce to the tanh term") {
    ZBus z;
    const Complex z0{14.0, 6.0};
    z.Z = CMatrix::Constant(2, 2, z0);
    const Complex expected = z0 / line.surge_impedance * std::tanh(line.gamma_d() * 0.5);
    const Complex beta = beta_coefficient(net, line, 0, z);
    CHECK(std::abs(beta - expected) <= 1e-14 * std::abs(expected));
  }
  SUBCASE("zero impedances give zero beta") {
    ZBus z;
    z.Z = CMatrix::Zero(2, 2);
    CHECK(std::abs(beta_coefficient(net, line, 1, z)) == 0.0);
  }
}

TEST_CASE("beta coefficients match the extended-precision oracle on the 6-bus benchmark") {
  const Network net = testutil::load_bench6();
  const ZBus zbus = build_zbus(build_ybus(net));
  const auto z_oracle = testutil::cl_inverse(testutil::oracle_ybus(net));

  double z_scale = 0.0;
  for (int i = 0; i < net.bus_count(); ++i) {
    for (int j = 0; j < net.bus_count(); ++j) {
      z_scale = std::max(z_scale, std::abs(zbus.Z(i, j)));
    }
  }

  for (const Line& line : net.lines()) {
    for (int k = 0; k < net.bus_count(); ++k) {
      const Complex expected = testutil::oracle_beta(net, line, k, z_oracle);
      const Complex actual = beta_coefficient(net, line, k, zbus);
      CHECK(std::abs(actual - expected) <=
            1e-9 * std::max(std::abs(expected), z_scale / std::abs(line.surge_impedance)));
    }
  }
}

TEST_CASE("beta is orientation sensitive whenever terminal impedances differ") {
  const Network net = testutil::load_bench6();
  const ZBus zbus = build_zbus(build_ybus(net));
  const Line& line = net.line("L1-2");
  Line swapped = line;
  std::swap(swapped.from_bus, swapped.to_bus);

  const int s = net.bus_index(line.from_bus);
  const int r = net.bus_index(line.to_bus);
  for (int k = 0; k < net.bus_count(); ++k) {
    const Complex forward = beta_coefficient(net, line, k, zbus);
    const Complex reversed = beta_coefficient(net, swapped, k, zbus);
    if (std::abs(zbus.Z(s, k) - zbus.Z(r, k)) > 1e-9) {
      CHECK(std::abs(forward - reversed) > 1e-12);
    }
  }
}

TEST_CASE("build_sensing_matrix") {
  SUBCASE("shapes and index maps on the minimal network") {
    const Network net = testutil::make_two_bus();
    const ZBus zbus = build_zbus(build_ybus(net));
    const SensingMatrix sensing = build_sensing_matrix(net, {{"L1-2"}}, zbus);
    CHECK(sensing.B_complex.rows() == 1);
    CHECK(sensing.B_complex.cols() == 2);
    CHECK(sensing.B_real.rows() == 2);
    CHECK(sensing.B_real.cols() == 4);
    CHECK(sensing.row_lines == std::vector<std::string>{"L1-2"});
    CHECK(sensing.column_buses == std::vector<int>{1, 2});
  }
  SUBCASE("unknown monitored line is rejected") {
    const Network net = testutil::make_two_bus();
    const ZBus zbus = build_zbus(build_ybus(net));
    CHECK_THROWS_AS(build_sensing_matrix(net, {{"nope"}}, zbus), ValidationError);
  }
  SUBCASE("empty and duplicated sensor sets are rejected") {
    const Network net = testutil::make_two_bus();
    CHECK_THROWS_AS(validate_sensors(net, {{}}), ValidationError);
    CHECK_THROWS_AS(validate_sensors(net, {{"L1-2", "L1-2"}}), ValidationError);
  }
  SUBCASE("entries equal per-entry beta evaluation on the 6-bus benchmark") {
    const Network net = testutil::load_bench6();
    const ZBus zbus = build_zbus(build_ybus(net));
    const SensorSet sensors = testutil::load_bench6_sensors();
    const SensingMatrix sensing = build_sensing_matrix(net, sensors, zbus);
    for (int row = 0; row < sensing.B_complex.rows(); ++row) {
      const Line& line = net.line(sensors.monitored_line_ids[row]);
      for (int k = 0; k < net.bus_count(); ++k) {
        CHECK(sensing.B_complex(row, k) == beta_coefficient(net, line, k, zbus));
      }
    }
  }
}

TEST_CASE("realify_matrix of a real matrix is block diagonal") {
  CMatrix a(2, 2);
  a << Complex(1.0, 0.0), Complex(-2.0, 0.0), Complex(0.5, 0.0), Complex(3.0, 0.0);
  const RMatrix stacked = realify_matrix(a);
  CHECK(stacked.topRightCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(stacked.bottomLeftCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((stacked.topLeftCorner(2, 2) - a.real()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((stacked.bottomRightCorner(2, 2) - a.real()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("realify and complexify") {
  SUBCASE("single complex entry") {
    CVector v(1);
    v(0) = {1.0, 2.0};
    const RVector r = realify(v);
    CHECK(r.size() == 2);
    CHECK(r(0) == 1.0);
    CHECK(r(1) == 2.0);
  }
  SUBCASE("real vector stacks zeros in the second half") {
    CVector v(3);
    v << Complex(1.0, 0.0), Complex(2.0, 0.0), Complex(-3.0, 0.0);
    const RVector r = realify(v);
    CHECK(r.tail(3).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single pair complexifies") {
    RVector r(2);
    r << 1.0, 2.0;
    const CVector v = complexify(r);
    CHECK(v.size() == 1);
    CHECK(v(0) == Complex(1.0, 2.0));
  }
  SUBCASE("zero vector complexifies to zeros") {
    CHECK(complexify(RVector::Zero(8)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("round trip is exact on random vectors") {
    Rng rng(12345);
    for (int trial = 0; trial < 20; ++trial) {
      const CVector v = testutil::random_cvector(rng, 9, 50.0);
      const CVector back = complexify(realify(v));
      CHECK((back - v).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("odd length is rejected") {
    CHECK_THROWS_AS(complexify(RVector::Ones(3)), ValidationError);
  }
}

TEST_CASE("realification is a homomorphism for matrix-vector products") {
  const Network net = testutil::load_bench6();
  const ZBus zbus = build_zbus(build_ybus(net));
  const SensingMatrix sensing =
      build_sensing_matrix(net, testutil::load_bench6_sensors(), zbus);

  Rng rng(987654321);
  for (int trial = 0; trial < 100; ++trial) {
    const CVector x = testutil::random_cvector(rng, net.bus_count(), 100.0);
    const RVector via_complex = realify(sensing.B_complex * x);
    const RVector via_real = sensing.B_real * realify(x);
    const double scale = via_complex.cwiseAbs().maxCoeff();
    CHECK((via_real - via_complex).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0));
  }
}
