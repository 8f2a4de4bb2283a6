#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace cpi;

namespace {

double max_abs_error(const Signal& s, const std::function<double(double)>& f) {
    double e = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) e = std::max(e, std::abs(s.samples[k] - f(s.time(k))));
    return e;
}

double window_dc(const PipelineTrace& tr, const Signal& s, const SamplingPlan& plan = {}) {
    const auto win = record_window(tr.grid, plan);
    return dc_component(sample_after_filter(s, FilterSpec{FilterKind::None}, win.t_start, win.duration, plan.tau));
}

NonidealityConfig three_wave_offsets() {
    NonidealityConfig c;
    c.mult_output_offset = {4.22e-3, 4.31e-3};
    c.mult_input_offset = {5e-3};
    c.output_gain = 10;
    return c;
}

}  // namespace

TEST_CASE("per_stage broadcasts a single entry and falls back past the end") {
    CHECK(per_stage({}, 3, 7.0) == 7.0);
    CHECK(per_stage({2.0}, 5, 7.0) == 2.0);
    CHECK(per_stage({1.0, 2.0}, 1, 7.0) == 2.0);
    CHECK(per_stage({1.0, 2.0}, 2, 7.0) == 7.0);
}

TEST_CASE("config validation") {
    NonidealityConfig c;
    c.oversample = 3;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = NonidealityConfig{};
    c.noise_sigma = -1;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    CHECK(NonidealityConfig{}.mult_scale * NonidealityConfig{}.amp_gain[0] == Catch::Approx(1.0));
}

TEST_CASE("grid covers whole alignment periods and contains every 2 us instant") {
    const auto g = make_grid(CpiInstance({3, 6, 4}), NonidealityConfig{});
    CHECK(g.period == Catch::Approx(1e-4));
    CHECK(g.periods == 30);
    CHECK(g.points_per_period % 50 == 0);
    CHECK(g.dt() <= 1.0 / (16 * 130e3));
    CHECK_THROWS_AS(make_grid(CpiInstance({1'000'000, 1}), NonidealityConfig{}), SimulationError);
}

TEST_CASE("synthesize_sources produces the nominal cosines") {
    const auto cfg = NonidealityConfig::ideal();
    const auto src = synthesize_sources(CpiInstance({2, 3}), cfg);
    REQUIRE(src.size() == 2);
    CHECK(max_abs_error(src[0], [](double t) { return std::cos(2 * M_PI * 20e3 * t); }) < 1e-9);
    CHECK(max_abs_error(src[1], [](double t) { return std::cos(2 * M_PI * 30e3 * t); }) < 1e-9);
    CHECK(src[0].t0 == 0.0);
    CHECK(same_grid(src[0], src[1]));

    const auto one = synthesize_sources(CpiInstance({1}), cfg);
    CHECK(max_abs_error(one[0], [](double t) { return std::cos(2 * M_PI * 10e3 * t); }) < 1e-9);
    CHECK(*std::max_element(one[0].samples.begin(), one[0].samples.end()) == Catch::Approx(1.0));
}

TEST_CASE("frequency errors stay within 5% for sigma 1%") {
    NonidealityConfig cfg = NonidealityConfig::ideal();
    cfg.freq_error_sigma = 0.01;
    int outside = 0;
    for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
        cfg.seed = seed;
        for (double e : draw_source_errors(2, cfg).relative_freq) outside += std::abs(e) > 0.05;
    }
    CHECK(outside <= 1);
    cfg.seed = 7;
    const auto a = draw_source_errors(2, cfg);
    const auto b = draw_source_errors(2, cfg);
    CHECK(a.relative_freq == b.relative_freq);
    CHECK(a.relative_freq[0] != a.relative_freq[1]);
}

TEST_CASE("multiply_stage follows the product law") {
    const auto cfg = NonidealityConfig::ideal();
    const auto g = make_grid(CpiInstance({2, 3}), cfg);
    const auto err = draw_source_errors(2, cfg);
    const auto x = synthesize_source(CpiInstance({2, 3}), cfg, g, err, 0);
    const auto y = synthesize_source(CpiInstance({2, 3}), cfg, g, err, 1);
    const auto out = amplify(multiply_stage(x, y, cfg, 0), cfg);
    CHECK(max_abs_error(out, [](double t) {
              return 0.5 * std::cos(2 * M_PI * 50e3 * t) + 0.5 * std::cos(2 * M_PI * 10e3 * t);
          }) <= 1e-6);

    NonidealityConfig off = cfg;
    off.mult_output_offset = {0.0123};
    const auto zero = multiply_stage(x, x.like(0.0), off, 0);
    for (double v : zero.samples) CHECK(v == Catch::Approx(0.0123));

    Signal shorter = x;
    shorter.samples.pop_back();
    CHECK_THROWS_AS(multiply_stage(x, shorter, cfg, 0), SimulationError);
}

TEST_CASE("multiplier output offset appears as DC") {
    NonidealityConfig cfg = NonidealityConfig::ideal();
    cfg.mult_output_offset = {4.22e-3};
    const CpiInstance inst({3, 6});
    const auto tr = run_cascade(inst, cfg);
    CHECK(window_dc(tr, tr.multiplier_outputs[0]) == Catch::Approx(4.22e-3).margin(1e-9));
}

TEST_CASE("amplify applies gain, offset and rails") {
    const auto cfg = NonidealityConfig::ideal();
    const auto base = cpi_test::make_signal(std::vector<double>(16, 0.1), 1e-6);
    for (double v : amplify(base, cfg).samples) CHECK(v == Catch::Approx(1.0));
    for (double v : amplify(base.like(2.0), cfg).samples) CHECK(v == 10.0);
    for (double v : amplify(base.like(-2.0), cfg).samples) CHECK(v == -10.0);

    auto cosine = base;
    for (std::size_t k = 0; k < cosine.size(); ++k) cosine.samples[k] = std::cos(0.3 * k) / 10.0;
    const auto back = amplify(cosine, cfg);
    for (std::size_t k = 0; k < cosine.size(); ++k) CHECK(std::abs(back.samples[k] - std::cos(0.3 * k)) <= 1e-9);
}

TEST_CASE("ideal cascade equals the closed-form product") {
    std::mt19937_64 rng(12);
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto v = cpi_test::random_values(n, 9, rng);
        const CpiInstance inst(v);
        const auto tr = run_cascade(inst, NonidealityConfig::ideal());
        CHECK(tr.stage_outputs.size() == n - 1);
        CHECK(tr.multiplier_outputs.size() == n - 1);
        const auto per = tr.grid.points_per_period;
        double e = 0;
        for (std::size_t k = 0; k < per; ++k) {
            const double t = tr.final.time(k);
            double p = 1;
            for (auto a : v) p *= std::cos(2 * M_PI * 1e4 * static_cast<double>(a) * t);
            e = std::max(e, std::abs(tr.final.samples[k] - p));
        }
        CHECK(e <= 1e-6 * static_cast<double>(n));
    }
}

TEST_CASE("NO-instance pairs give zero DC in the ideal chain") {
    for (auto [a, b] : {std::pair{2, 3}, {1, 7}, {5, 4}}) {
        const CpiInstance inst({static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b)});
        const auto tr = run_cascade(inst, NonidealityConfig::ideal());
        CHECK(std::abs(window_dc(tr, tr.final)) <= 1e-12);
    }
}

TEST_CASE("uncompensated offsets lift the [3,6,4] DC to the half-volt scale") {
    const auto tr = run_cascade(CpiInstance({3, 6, 4}), three_wave_offsets());
    const double dc = window_dc(tr, tr.final);
    CHECK(dc > 0.1);
    CHECK(dc < 2.0);
}

TEST_CASE("bandwidth warning") {
    CHECK_FALSE(run_cascade(CpiInstance({3, 2, 5}), NonidealityConfig{}).bandwidth_warning);
    CHECK(run_cascade(CpiInstance({7, 2, 5}), NonidealityConfig{}).bandwidth_warning);
}

TEST_CASE("one-pole bandwidth attenuates a line beyond f*") {
    NonidealityConfig cfg = NonidealityConfig::ideal();
    cfg.bandwidth_model = BandwidthModel::OnePole;
    cfg.bandwidth_f_star = 30e3;
    const auto g = make_grid(CpiInstance({6}), cfg);
    auto s = synthesize_source(CpiInstance({6}), cfg, g, draw_source_errors(1, cfg), 0);
    apply_bandwidth(s, cfg);
    const double expected = 1.0 / std::sqrt(1.0 + 4.0);
    CHECK(*std::max_element(s.samples.begin(), s.samples.end()) == Catch::Approx(expected).epsilon(1e-6));
    cfg.bandwidth_model = BandwidthModel::HardCutoff;
    apply_bandwidth(s, cfg);
    CHECK(*std::max_element(s.samples.begin(), s.samples.end()) < 1e-9);
}

TEST_CASE("gain errors scale the DC by the product of the gains") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> r(0.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = random_instance(2 + trial % 4, 12, Answer::Yes, trial);
        NonidealityConfig cfg = NonidealityConfig::ideal();
        const auto base = run_cascade(inst, cfg);
        double prod = 1;
        cfg.source_amplitude.clear();
        for (std::size_t i = 0; i < inst.size(); ++i) {
            cfg.source_amplitude.push_back(r(rng));
            prod *= cfg.source_amplitude.back();
        }
        const auto scaled = run_cascade(inst, cfg);
        const double ratio = window_dc(scaled, scaled.final) / window_dc(base, base.final);
        CHECK(ratio == Catch::Approx(prod).epsilon(1e-6));
    }
}

TEST_CASE("identical seeds give bit-identical traces") {
    NonidealityConfig cfg;
    cfg.noise_sigma = 1e-3;
    cfg.freq_error_sigma = 1e-3;
    cfg.phase_error_sigma = 0.01;
    cfg.mult_output_offset = {1e-3};
    cfg.seed = 99;
    const auto a = run_cascade(CpiInstance({3, 2, 5}), cfg);
    const auto b = run_cascade(CpiInstance({3, 2, 5}), cfg);
    CHECK(a.final.samples == b.final.samples);
    cfg.seed = 100;
    CHECK(run_cascade(CpiInstance({3, 2, 5}), cfg).final.samples != a.final.samples);
}

TEST_CASE("no stage output leaves the rails") {
    NonidealityConfig cfg;
    cfg.amp_gain = {80.0};
    cfg.source_amplitude = {3.0};
    cfg.supply_voltage = 5.0;
    cfg.output_gain = 10;
    cfg.noise_sigma = 0.5;
    const auto tr = run_cascade(CpiInstance({1, 2, 3, 4}), cfg);
    for (const auto* group : {&tr.multiplier_outputs, &tr.stage_outputs})
        for (const auto& s : *group)
            for (double v : s.samples) CHECK(std::abs(v) <= 5.0);
    for (double v : tr.final.samples) CHECK(std::abs(v) <= 5.0);
}

TEST_CASE("an offset at the last stage reaches the output through its amplifier only") {
    for (const auto& v : {std::vector<std::uint64_t>{3, 6, 4}, {2, 3}, {1, 9, 1, 4}}) {
        const CpiInstance inst(v);
        NonidealityConfig cfg = NonidealityConfig::ideal();
        const double c = 3e-3;
        cfg.mult_output_offset.assign(inst.size() - 1, 0.0);
        cfg.mult_output_offset.back() = c;
        cfg.output_gain = 2.0;
        const auto run = run_pipeline(inst, cfg, FilterSpec{});
        CHECK(run.dc == Catch::Approx(c * 10.0 * 2.0).margin(1e-6));
    }
}

TEST_CASE("nominal chain gain") {
    NonidealityConfig cfg;
    CHECK(nominal_chain_gain(3, cfg) == Catch::Approx(1.0));
    cfg.output_gain = 10;
    cfg.source_amplitude = {2.0};
    CHECK(nominal_chain_gain(3, cfg) == Catch::Approx(80.0));
}
