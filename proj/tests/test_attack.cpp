#include <doctest.h>

#include "audit/attack.hpp"
#include "audit/error.hpp"
#include "audit/rng.hpp"
#include "audit/text.hpp"
#include "learn_oracle.hpp"
#include "test_util.hpp"

using namespace audit;

namespace {

std::vector<double> interior_point(int d, Rng& rng) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform(0.2, 0.8);
    return x;
}

double eps_shift(double l1, const AttackConfig& cfg) { return cfg.epsilon * l1; }

}  // namespace

TEST_CASE("hand-computed single step") {
    const ModelParams m(Logistic{2}, {1, -1, 0});
    const auto adv = pgd_attack(m, std::vector<double>{0, 0}, 0, AttackConfig{});
    CHECK(adv == std::vector<double>{1.0 / 255.0, 0.0});
}

TEST_CASE("zero budget is the identity") {
    const auto m = testutil::random_model(Mlp{6, 3}, 2);
    Rng rng(1);
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    cfg.steps = 5;
    for (int i = 0; i < 20; ++i) {
        const auto x = interior_point(6, rng);
        CHECK(pgd_attack(m, x, i % 2, cfg) == x);
    }
    cfg.random_start = 7;
    const auto x = interior_point(6, rng);
    CHECK(pgd_attack(m, x, 1, cfg) == x);
}

TEST_CASE("projection keeps the budget and the range") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto m = testutil::random_model(Mlp{5, 4}, i);
        std::vector<double> x(5);
        for (double& v : x) v = rng.uniform();
        AttackConfig cfg;
        cfg.epsilon = rng.uniform(0.0, 0.2);
        cfg.step_size = rng.uniform(0.01, 0.1);
        cfg.steps = 1 + static_cast<int>(rng.below(5));
        if (i % 3 == 0) cfg.random_start = static_cast<std::uint64_t>(i);
        const auto adv = pgd_attack(m, x, i % 2, cfg);
        for (int j = 0; j < 5; ++j) {
            CHECK(std::abs(adv[j] - x[j]) <= cfg.epsilon);
            CHECK(adv[j] >= 0.0);
            CHECK(adv[j] <= 1.0);
        }
    }
}

TEST_CASE("zero-weight model is untouched") {
    const ModelParams zero(Logistic{4});
    const auto samples = testutil::blobs(4, 20, 0.2, 0.05, 3);
    std::vector<Sample> inside = samples;
    for (auto& s : inside) for (double& v : s.features) v += 0.5;
    const auto rep = evaluate_attack(zero, inside, AttackConfig{});
    CHECK(rep.clean.acc == rep.adversarial.acc);
    CHECK(rep.clean.auc == rep.adversarial.auc);
    CHECK(rep.flip_rate() == 0.0);
}

TEST_CASE("one step shifts a logistic logit by eps times the l1 norm") {
    Rng rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        const auto m = testutil::random_model(Logistic{8}, rep);
        const auto w = m.logistic_weights();
        double l1 = 0.0;
        for (double v : w) l1 += std::abs(v);
        AttackConfig cfg;
        cfg.epsilon = cfg.step_size = 0.05;
        const auto x = interior_point(8, rng);
        const int y = rep % 2;
        const auto adv = pgd_attack(m, x, y, cfg);
        const double before = logit(m, x);
        const double after = logit(m, adv);
        CHECK(after - before == doctest::Approx(y == 0 ? eps_shift(l1, cfg) : -eps_shift(l1, cfg)).epsilon(1e-9));
        CHECK(bce(forward(m, adv), y) >= bce(forward(m, x), y));
        // flips exactly when the prediction sits on the attacked side within eps*l1
        const bool predicted = forward(m, x) >= 0.5;
        if (predicted == (y == 1)) {
            const bool expect_flip = std::abs(before) < cfg.epsilon * l1 || (y == 1 && before == cfg.epsilon * l1);
            CHECK(((forward(m, adv) >= 0.5) != predicted) == expect_flip);
        }
    }
}

TEST_CASE("attack report") {
    const ModelParams m(Logistic{2}, {4, -4, 0});
    const std::vector<Sample> samples = {{{0.5, 0.49}, 1}, {{0.49, 0.5}, 0}, {{0.9, 0.1}, 1}, {{0.1, 0.9}, 0}};
    AttackConfig cfg;
    cfg.epsilon = cfg.step_size = 0.02;
    const auto rep = evaluate_attack(m, samples, cfg);
    CHECK(rep.clean.acc == 1.0);
    CHECK(rep.adversarial.acc == 0.5);
    CHECK(rep.flip_rate() == 0.5);
    CHECK(rep.samples[0].flipped);
    CHECK_FALSE(rep.samples[2].flipped);

    const std::vector<Sample> fakes = {{{0.5, 0.49}, 1}};
    CHECK(std::isnan(evaluate_attack(m, fakes, cfg).clean.auc));

    testutil::TempDir dir("attack");
    write_attack_report(dir / "a.csv", rep);
    const auto text = read_text_file(dir / "a.csv");
    CHECK(text.starts_with("sample,clean_prob,adv_prob,flipped\n0,"));
    CHECK(text.find("\n# ") != std::string::npos);

    const auto again = evaluate_attack(m, samples, cfg);
    for (std::size_t i = 0; i < samples.size(); ++i) CHECK(again.samples[i].adv_prob == rep.samples[i].adv_prob);
}

TEST_CASE("config validation") {
    AttackConfig cfg;
    cfg.epsilon = -1.0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.step_size = 0.0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = {};
    cfg.clamp_lo = 1.0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    const ModelParams m(Logistic{2});
    CHECK_THROWS_AS(pgd_attack(m, std::vector<double>{0.5}, 0, AttackConfig{}), DimensionError);
}
