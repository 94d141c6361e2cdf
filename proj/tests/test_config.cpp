#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "stochmem/config.hpp"

using namespace stochmem;

namespace {

std::string error_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("numeric expressions") {
    CHECK(parse_number("0.25") == 0.25);
    CHECK(parse_number("-3e-2") == -0.03);
    CHECK(parse_number("pi") == std::numbers::pi);
    CHECK(parse_number("2*pi") == 2.0 * std::numbers::pi);
    CHECK(parse_number("-pi") == -std::numbers::pi);
    CHECK(parse_number("0.5pi") == 0.5 * std::numbers::pi);
    CHECK(parse_number("1/256") == 1.0 / 256);
    CHECK(parse_number("2*pi/3") == doctest::Approx(2.0 * std::numbers::pi / 3));
    CHECK(parse_number(" 4 ") == 4.0);
    for (const char* bad : {"", "abc", "1/", "2**pi", "1.5.2", "pi2"})
        CHECK_THROWS_AS(parse_number(bad), ConfigError);
}

TEST_CASE("parsing a complete config") {
    const ExperimentConfig cfg = parse_config(R"(
        # correlated-noise sweep
        model.family = correlated_linear
        model.p = 0.15
        model.q = resonance
        model.c = 1
        model.v1 = 1.5      # drive
        model.omega = 2*pi
        run.scheme = em
        run.dt = 1/512
        run.stride = 2
        run.realizations = 128
        run.seed = 11
        run.phase = fixed
        run.averaging = trajectories
        run.bootstrap = 200
        sweep.parameter = q
        sweep.values = 0.05:0.25:0.05
        sweep.outer_parameter = c
        sweep.outer_values = 1, 0.5
        out.dir = results/lsr
    )");
    CHECK(cfg.model.family == ModelFamily::CorrelatedLinear);
    CHECK(cfg.model.q_at_resonance);
    CHECK(cfg.model.v1 == 1.5);
    CHECK(cfg.scheme == Scheme::EulerMaruyama);
    CHECK(cfg.dt == 1.0 / 512);
    CHECK(cfg.stride == 2);
    CHECK(cfg.realizations == 128);
    CHECK(cfg.seed == 11);
    CHECK(cfg.phase == PhaseMode::Fixed);
    CHECK(cfg.averaging == SpectrumAveraging::Trajectories);
    CHECK(cfg.bootstrap == 200);
    CHECK(cfg.sweep.parameter == "q");
    REQUIRE(cfg.sweep.values.size() == 5);
    CHECK(cfg.sweep.values[2] == 0.15);
    CHECK(cfg.sweep.values[4] == 0.25);
    CHECK(cfg.sweep.outer_values == std::vector<double>{1.0, 0.5});
    CHECK(cfg.out_dir == "results/lsr");

    const ModelSpec model = cfg.model.build();
    const auto* m = model.get_if<CorrelatedLinearModel>();
    REQUIRE(m != nullptr);
    CHECK(m->q == doctest::Approx(0.15));
}

TEST_CASE("defaults and derived run length") {
    const ExperimentConfig cfg = parse_config("model.family = double_well\nmodel.v1 = 0.2\n");
    CHECK(cfg.scheme == Scheme::HeunStratonovich);
    CHECK(cfg.dt == 1.0 / 256);
    CHECK(cfg.stride == 1);
    CHECK(cfg.transient_periods == 20.0);
    CHECK(cfg.record_periods == 64);
    CHECK(cfg.resolved_t_end() == doctest::Approx(84.0));
    CHECK(cfg.integration().t_end == doctest::Approx(84.0));
    CHECK(cfg.ensemble(3).workers == 3);
    const ModelSpec model = cfg.model.build();
    CHECK(model.family() == ModelFamily::DoubleWell);
}

TEST_CASE("canonical text round-trips") {
    const char* text = R"(
        model.family = monostable_power
        model.n = 3
        model.p = 0.2
        model.q = resonance
        model.c = 0.5
        model.v1 = 1.5
        model.phi = pi/3
        run.t_end = 12.5
        run.transient_periods = 5
        run.realizations = 7
        run.seed = 12345678901
        run.deadband = 0.05
        sweep.parameter = p
        sweep.values = 0.1, 0.2, 0.3
        out.dir = somewhere
    )";
    const ExperimentConfig a = parse_config(text);
    const std::string canonical = a.to_text();
    const ExperimentConfig b = parse_config(canonical);
    CHECK(b.to_text() == canonical);
    CHECK(b.model.n == 3);
    CHECK(b.model.phi == a.model.phi);
    CHECK(b.seed == 12345678901ull);
    CHECK(b.t_end == 12.5);
    CHECK(b.sweep.values == a.sweep.values);

    std::string sidecar;
    sidecar += "# command = spectrum\n";
    for (std::size_t pos = 0; pos < canonical.size();) {
        const std::size_t end = canonical.find('\n', pos);
        sidecar += "# " + canonical.substr(pos, end - pos) + "\n";
        pos = end + 1;
    }
    sidecar += "# result.snr_db = 12.5\n";
    const ExperimentConfig c = parse_sidecar(sidecar);
    CHECK(c.to_text() == canonical);

    const auto path = std::filesystem::temp_directory_path() / "stochmem_config_roundtrip.csv.meta";
    std::ofstream(path) << sidecar;
    CHECK(load_config(path).to_text() == canonical);
    std::filesystem::remove(path);
}

TEST_CASE("errors name the offending line") {
    CHECK(error_of("model.family = double_well\nmodel.bogus = 1\n").find("line 2") != std::string::npos);
    CHECK(error_of("model.family = double_well\n\nrun.dt = fast\n").find("line 3") != std::string::npos);
    CHECK(error_of("model.family = double_well\nno equals sign\n").find("line 2") != std::string::npos);
    CHECK_FALSE(error_of("model.family = nothing\n").empty());
    CHECK_FALSE(error_of("run.scheme = rk4\n").empty());
    CHECK_FALSE(error_of("run.phase = sometimes\n").empty());
    CHECK_FALSE(error_of("run.realizations = 0\n").empty());
    CHECK_FALSE(error_of("run.dt = -1\n").empty());
    CHECK_FALSE(error_of("frobnicate.x = 1\n").empty());
}

TEST_CASE("sweep parameters must belong to the family") {
    CHECK_FALSE(error_of("model.family = double_well\nsweep.parameter = q\nsweep.values = 1\n").empty());
    CHECK_FALSE(error_of("model.family = time_delay\nsweep.parameter = sigma\nsweep.values = 1\n").empty());
    CHECK(error_of("model.family = double_well\nsweep.parameter = sigma\nsweep.values = 1, 2\n").empty());
    CHECK(error_of("model.family = monostable_power\nsweep.parameter = n\nsweep.values = 2, 3\n").empty());
    // model keys outside the family are rejected too
    CHECK_FALSE(error_of("model.family = double_well\nmodel.p = 0.1\n").empty());

    ModelParameters mp;
    mp.family = ModelFamily::CorrelatedLinear;
    CHECK(mp.has_field("c"));
    CHECK_FALSE(mp.has_field("sigma"));
    mp.set("q", 0.4);
    CHECK(mp.get("q") == 0.4);
}

TEST_CASE("resonance requires correlated noise") {
    const ExperimentConfig cfg = parse_config("model.family = correlated_linear\nmodel.p = 0.1\nmodel.q = resonance\nmodel.c = 0\n");
    CHECK_THROWS_AS(cfg.model.build(), ConfigError);
}

TEST_CASE("invalid model parameters surface as model errors") {
    const ExperimentConfig cfg = parse_config("model.family = correlated_linear\nmodel.c = 1.5\n");
    CHECK_THROWS_AS(cfg.model.build(), ModelError);
}
