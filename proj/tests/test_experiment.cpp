#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fracgrad/experiment.hpp"

using namespace fracgrad;

namespace {

constexpr double kPi = 3.14159265358979323846;

RunConfig from(const std::string& text) {
    std::istringstream is(text);
    return RunConfig::parse(is, "test.cfg");
}

std::string error_of(const std::string& text) {
    try {
        from(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

const char* kBase = "alpha = 0.84\nT = 1\nM = 20\nomega.lo = 0\nomega.hi = 0.25\nsensor.kind = pointwise\n"
                    "sensor.location = 0.2\ninitial_state = trig_sq\n";

}  // namespace

TEST_CASE("config parsing") {
    auto c = from(std::string(kBase) + "# comment\n\nepsilon = 1e-8  # trailing\n");
    CHECK(c.dim == 1);
    CHECK(c.alpha == 0.84);
    CHECK(c.M == 20);
    CHECK(c.state_modes == 64);
    CHECK(c.omega.hi[0] == 0.25);
    REQUIRE(c.sensors.size() == 1);
    CHECK(c.sensors[0].location[0] == 0.2);
    CHECK(c.epsilon == 1e-8);
    CHECK(c.time_nodes == 512);
    CHECK(c.regularization.kind == RegularizationKind::tikhonov);
    CHECK(c.adjoint == AdjointConvention::potential);

    auto two = from("domain = 2d\nsensor.1.kind = pointwise\nsensor.1.location = 0.3, 0.4\n"
                    "sensor.2.kind = zonal\nsensor.2.support.lo = 0.1,0.2\nsensor.2.support.hi = 0.4,0.6\n"
                    "sensor.2.weight = product_trig\nsensor.2.weight.scale = 2\n");
    REQUIRE(two.sensors.size() == 2);
    CHECK(two.omega.volume() == 1.0);
    auto s = two.build_sensors();
    CHECK(s[1].weight({0.2, 0.3}) ==
          doctest::Approx(2 * std::cos(std::sqrt(3.0) * kPi * 0.2) * std::sin(std::sqrt(2.0) * kPi * 0.3)));
}

TEST_CASE("config errors name the field") {
    CHECK(error_of(std::string(kBase) + "alpha = abc\n").find("alpha") != std::string::npos);
    CHECK(error_of(std::string(kBase) + "alpha = 1.5\n").find("duplicate") != std::string::npos);
    CHECK(error_of("alpha = 1.5\nsensor.kind = pointwise\nsensor.location = 0.2\n").find("alpha") !=
          std::string::npos);
    CHECK(error_of(std::string(kBase) + "bogus = 1\n").find("bogus") != std::string::npos);
    CHECK(error_of("alpha = 0.5\n").find("sensor") != std::string::npos);
    CHECK(error_of("sensor.kind = pointwise\nsensor.location = 1.0\n").find("sensor.1") != std::string::npos);
    CHECK(error_of("sensor.kind = pointwise\nsensor.location = 0.2\nomega.lo = 0.3\n").find("omega.hi") !=
          std::string::npos);
    CHECK(error_of("sensor.kind = laser\n").find("sensor.1.kind") != std::string::npos);
    CHECK(error_of("sensor.kind = pointwise\nsensor.location = 0.2\ninitial_state = custom\n")
              .find("coefficients") != std::string::npos);
    CHECK(error_of("sensor.kind = pointwise\nsensor.location = 0.2\nM = 2.5\n").find("M") == std::string::npos);
    CHECK(error_of("sensor.kind = pointwise\nsensor.location = 0.2\nM = 2.5\n").find("m:") != std::string::npos);
    CHECK(error_of("no equals sign\n").find(":1:") != std::string::npos);
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/file.cfg"), InputError);
}

TEST_CASE("catalog states and gradients") {
    auto c = from(kBase);
    auto u = c.initial_state_field();
    auto g = c.truth_gradient();
    for (double y : {0.1, 0.3, 0.77}) {
        CHECK(u({y, 0}) == doctest::Approx(std::pow(std::cos(kPi * y) * std::sin(kPi * y), 2)).epsilon(1e-14));
        const double closed = 2 * kPi * (std::pow(std::cos(y * kPi), 2) - std::pow(std::sin(y * kPi), 2)) *
                              std::cos(y * kPi) * std::sin(y * kPi);
        CHECK(g({y, 0})[0] == doctest::Approx(closed).epsilon(1e-13));
    }

    auto p = from("initial_state = poly_sq\nsensor.kind = pointwise\nsensor.location = 0.2\n");
    CHECK(p.truth_gradient()({0.4, 0})[0] == doctest::Approx(2 * 0.4 * 0.6 * 0.2));

    // 2D product rule against a central difference.
    auto q = from("domain = 2d\ninitial_state = trig_sq\nsensor.kind = pointwise\nsensor.location = 0.2,0.3\n");
    const Point x{0.31, 0.62};
    const double h = 1e-6;
    auto f = q.initial_state_field();
    auto d = q.truth_gradient()(x);
    CHECK(d[0] == doctest::Approx((f({x[0] + h, x[1]}) - f({x[0] - h, x[1]})) / (2 * h)).epsilon(1e-7));
    CHECK(d[1] == doctest::Approx((f({x[0], x[1] + h}) - f({x[0], x[1] - h})) / (2 * h)).epsilon(1e-7));

    auto m = from("initial_state = custom\ninitial_state.coefficients = 0, 1.5\nstate_modes = 4\n"
                  "sensor.kind = pointwise\nsensor.location = 0.2\n");
    auto ms = m.initial_modal_state();
    CHECK(ms.coefficients.size() == 4);
    CHECK(ms.coefficients[1] == 1.5);
    CHECK(m.truth_gradient()({0.2, 0})[0] == doctest::Approx(1.5 * std::sqrt(2.0) * 2 * kPi * std::cos(0.4 * kPi)));

    auto z = from("initial_state = zero\nsensor.kind = pointwise\nsensor.location = 0.2\n");
    CHECK(z.initial_modal_state().coefficients.isZero(0.0));
}

TEST_CASE("fingerprint") {
    auto a = from(kBase);
    auto b = from(std::string("# reordered\n") + "sensor.location = 0.2\nsensor.kind = pointwise\nalpha = 0.84\n"
                  "T = 1.0\nM = 20\nomega.lo = 0.0\nomega.hi = 0.25\ninitial_state = trig_sq\noutput_dir = elsewhere\n");
    CHECK(a.canonical() == b.canonical());
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint().size() == 16);
    auto c = from(std::string(kBase) + "seed = 2\n");
    CHECK(a.fingerprint() != c.fingerprint());
    // The canonical form parses back to the same settings.
    CHECK(from(a.canonical()).canonical() == a.canonical());
}

TEST_CASE("problem wiring") {
    auto c = from(std::string(kBase) + "state_modes = 40\nregularization = truncated_svd\nregularization.value = 1e-9\n"
                                       "policy.m_step = 2\npolicy.m_max = 30\nadjoint = divergence\n");
    auto p = c.problem();
    CHECK(p.sys.size() == 40);
    CHECK(p.M == 20);
    CHECK(p.regularization.kind == RegularizationKind::truncated_svd);
    CHECK(p.regularization.value == 1e-9);
    CHECK(p.policy.m_step == 2);
    CHECK(p.adjoint == AdjointConvention::divergence);
    CHECK(c.time_grid().size() == 512);
    CHECK(c.time_grid().horizon() == 1.0);
}
