#include <gtest/gtest.h>

#include <lutclock/app/config.hpp>
#include <lutclock/app/io.hpp>

using namespace lutclock;
using namespace lutclock::app;

namespace {

std::string config_text() { return read_text(std::string(LUTCLOCK_SOURCE_DIR) + "/configs/three_ion.yaml"); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    if (pos == std::string::npos) throw std::logic_error("pattern not found: " + from);
    return s.replace(pos, from.size(), to);
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, ShippedConfigLoads) {
    const auto cfg = parse_config(config_text());
    EXPECT_EQ(cfg.trap.trap.n_ions, 3);
    EXPECT_NEAR(cfg.trap.trap.b_gradient, 113e-6, 1e-18);
    EXPECT_EQ(cfg.simulation.rng_seed, 20190711u);
    EXPECT_EQ(cfg.protocol.start, UpperLevel::F7);
    EXPECT_EQ(cfg.protocol.microwave, MicrowaveModel::physical);
    EXPECT_EQ(cfg.correlation.plain.times().size(), 30u);
    EXPECT_NEAR(cfg.estimator.delta_f, 0.5922, 1e-15);
    EXPECT_FALSE(cfg.shifts.couplings.has_value());
}

TEST(Config, ErrorsNameTheKey) {
    const std::string text = config_text();
    EXPECT_NE(error_of(replace(text, "  micromotion_offset_hz: [0.0047, 0.0, 0.0047]\n", ""))
                  .find("trap.micromotion_offset_hz: missing required key"),
              std::string::npos);
    EXPECT_NE(error_of(replace(text, "n_ions: 3", "n_ions: three")).find("trap.n_ions"),
              std::string::npos);
    EXPECT_NE(error_of(replace(text, "  rng_seed: 20190711\n", "  rng_seed: 20190711\n  extra: 1\n"))
                  .find("simulation.extra: unknown key"),
              std::string::npos);
    EXPECT_NE(error_of(replace(text, "microwave_model: physical", "microwave_model: perfect"))
                  .find("protocol.microwave_model"),
              std::string::npos);
    EXPECT_NE(error_of("levels: [").find("YAML parse error"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST(Config, ExplicitCouplingsOverrideModel) {
    const std::string text = replace(config_text(), "  tau_1_s: 0.01\n  tau_2_s: 0.01\n  ramsey_time_s: 1.0\n  clock",
                                     "  couplings:\n"
                                     "    delta_1_7: [{rabi_hz: 1.0, detuning_hz: 100.0, sign: 1}]\n"
                                     "    delta_1_8: []\n"
                                     "    delta_2_6: []\n"
                                     "    delta_2_7: []\n"
                                     "  tau_1_s: 0.01\n  tau_2_s: 0.01\n  ramsey_time_s: 1.0\n  clock");
    const auto cfg = parse_config(text);
    ASSERT_TRUE(cfg.shifts.couplings.has_value());
    ASSERT_EQ(cfg.shifts.couplings->c_1_7.size(), 1u);
    EXPECT_NEAR(cfg.shifts.couplings->c_1_7[0].detuning, hz_to_angular(100.0), 1e-9);
}

TEST(Io, CsvRoundTrip) {
    CsvTable t{{"t [s]", "p [1]"}, {{0.1, -0.25}, {1.0 / 3.0, 1e-300}}};
    const auto back = parse_csv(to_csv(t));
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
    t.rows.push_back({1.0});
    EXPECT_THROW(to_csv(t), Error);
}

TEST(Io, JsonNumbersAndHash) {
    EXPECT_EQ(json_number(std::nan("")), "nan");
    EXPECT_EQ(json_number(-INFINITY), "-inf");
    EXPECT_EQ(json_number(0.5), 0.5);
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
