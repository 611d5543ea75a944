#include <catch2/catch_amalgamated.hpp>

#include "densemble/filter.hpp"
#include "densemble/rng.hpp"

using namespace densemble;

TEST_CASE("weights_l: threshold is inclusive") {
    SECTION("eps1 = 0 keeps everything with positive l_con") {
        BinaryWeights w = weights_l({0.0, 1e-9, 0.5, 1.0}, 0.0);
        CHECK(w == BinaryWeights{0, 1, 1, 1});
    }
    SECTION("default eps1 = 0.020 splits (0.015, 0.5)") {
        BinaryWeights w = weights_l({0.015, 0.5}, 0.020);
        CHECK(w == BinaryWeights{0, 1});
    }
    SECTION("values exactly at eps1 are filtered") {
        BinaryWeights w = weights_l({0.02, 0.02, 0.02}, 0.02);
        CHECK(w == BinaryWeights{0, 0, 0});
    }
}

TEST_CASE("weights_k: soft percentile rule") {
    SECTION("eps2 = 0 keeps everything") {
        BinaryWeights w = weights_k({0.3, 0.1, 0.9}, 0.0);
        CHECK(w == BinaryWeights{1, 1, 1});
    }
    SECTION("batch of 20 at 5 percent filters exactly the minimum") {
        std::vector<double> m_con(20);
        Rng rng(1);
        for (double& v : m_con) v = 0.2 + 0.8 * rng.uniform();
        m_con[13] = 0.11; // unique minimum
        BinaryWeights w = weights_k(m_con, 5.0);
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < w.size(); ++i) zeros += w[i] ? 0 : 1;
        CHECK(zeros == 1);
        CHECK(w[13] == 0);
    }
    SECTION("all-equal scores break ties by index") {
        BinaryWeights w = weights_k(std::vector<double>(10, 0.5), 20.0);
        CHECK(w == BinaryWeights{0, 0, 1, 1, 1, 1, 1, 1, 1, 1});
    }
    SECTION("filters exactly floor(eps2/100 * n) for a grid of (n, eps2)") {
        Rng rng(2);
        for (std::size_t n : {2, 3, 10, 19, 20, 64, 100, 137}) {
            for (double eps2 : {0.0, 1.0, 2.5, 5.0, 10.0, 33.3, 50.0, 99.0}) {
                std::vector<double> m_con(n);
                for (double& v : m_con) v = rng.uniform();
                BinaryWeights w = weights_k(m_con, eps2);
                const auto expected = static_cast<std::size_t>(eps2 / 100.0 * static_cast<double>(n));
                std::size_t zeros = 0;
                for (auto v : w) zeros += v ? 0 : 1;
                CHECK(zeros == expected);
            }
        }
    }
    SECTION("eps2 >= 100 or negative is a config error") {
        CHECK_THROWS_AS(weights_k({0.5, 0.5}, 100.0), ConfigError);
        CHECK_THROWS_AS(weights_k({0.5, 0.5}, -1.0), ConfigError);
    }
}

TEST_CASE("weights_k_hard: inclusive absolute threshold") {
    BinaryWeights w = weights_k_hard({0.1, 0.2, 0.3}, 0.2);
    CHECK(w == BinaryWeights{0, 0, 1});
}

TEST_CASE("combine: elementwise AND") {
    SECTION("all ones stay ones") {
        SampleWeights sw = combine(BinaryWeights(3, 1), BinaryWeights(3, 1));
        CHECK(sw.w_s == BinaryWeights{1, 1, 1});
        CHECK(sw.filtered_count() == 0);
    }
    SECTION("disjoint zeros clear everything") {
        SampleWeights sw = combine({1, 0}, {0, 1});
        CHECK(sw.w_s == BinaryWeights{0, 0});
    }
    SECTION("random binaries match the AND oracle and commute") {
        Rng rng(3);
        for (int t = 0; t < 100; ++t) {
            const std::size_t n = 1 + rng.uniform_below(30);
            BinaryWeights a(n), b(n);
            for (auto& v : a) v = static_cast<std::uint8_t>(rng.uniform_below(2));
            for (auto& v : b) v = static_cast<std::uint8_t>(rng.uniform_below(2));
            SampleWeights ab = combine(a, b);
            SampleWeights ba = combine(b, a);
            SampleWeights aa = combine(ab.w_s, ab.w_s);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(ab.w_s[i] == (a[i] && b[i] ? 1 : 0));
                CHECK(ab.w_s[i] == ba.w_s[i]);
                CHECK(aa.w_s[i] == ab.w_s[i]); // idempotent
            }
        }
    }
    SECTION("length mismatch throws") {
        CHECK_THROWS_AS(combine(BinaryWeights(2, 1), BinaryWeights(3, 1)), ShapeError);
    }
}

TEST_CASE("monotonicity in the thresholds") {
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.uniform_below(40);
        std::vector<double> scores(n);
        for (double& v : scores) v = rng.uniform();

        const double lo = rng.uniform(), hi = std::min(1.0, lo + rng.uniform() * (1.0 - lo));
        BinaryWeights wl_lo = weights_l(scores, lo);
        BinaryWeights wl_hi = weights_l(scores, hi);
        for (std::size_t i = 0; i < n; ++i) {
            if (wl_lo[i] == 0) CHECK(wl_hi[i] == 0);
        }

        const double p_lo = rng.uniform() * 99.0;
        const double p_hi = p_lo + rng.uniform() * (99.9 - p_lo);
        BinaryWeights wk_lo = weights_k(scores, p_lo);
        BinaryWeights wk_hi = weights_k(scores, p_hi);
        for (std::size_t i = 0; i < n; ++i) {
            if (wk_lo[i] == 0) CHECK(wk_hi[i] == 0);
        }
    }
}

TEST_CASE("apply_filter: disabled filter keeps every sample") {
    ConfidenceReport rep;
    rep.l_con = {0.0, 0.001, 0.9};
    rep.m_con = {0.11, 0.5, 0.9};
    FilterConfig cfg;
    cfg.enabled = false;
    SampleWeights sw = apply_filter(rep, cfg);
    CHECK(sw.w_s == BinaryWeights{1, 1, 1});
}

TEST_CASE("apply_filter: per-side switches reproduce the ablation variants") {
    ConfidenceReport rep;
    rep.l_con = {0.001, 0.9, 0.9, 0.9};
    rep.m_con = {0.9, 0.2, 0.8, 0.7};
    FilterConfig cfg;
    cfg.eps1 = 0.02;
    cfg.eps2_percent = 25.0; // filters exactly one of four

    SECTION("both sides active") {
        SampleWeights sw = apply_filter(rep, cfg);
        CHECK(sw.w_l == BinaryWeights{0, 1, 1, 1});
        CHECK(sw.w_k == BinaryWeights{1, 0, 1, 1});
        CHECK(sw.w_s == BinaryWeights{0, 0, 1, 1});
    }
    SECTION("l only") {
        cfg.m_con_enabled = false;
        SampleWeights sw = apply_filter(rep, cfg);
        CHECK(sw.w_k == BinaryWeights{1, 1, 1, 1});
        CHECK(sw.w_s == BinaryWeights{0, 1, 1, 1});
    }
    SECTION("m only") {
        cfg.l_con_enabled = false;
        SampleWeights sw = apply_filter(rep, cfg);
        CHECK(sw.w_l == BinaryWeights{1, 1, 1, 1});
        CHECK(sw.w_s == BinaryWeights{1, 0, 1, 1});
    }
    SECTION("hard m-con variant") {
        cfg.m_con_hard = true;
        cfg.eps2_hard = 0.7;
        SampleWeights sw = apply_filter(rep, cfg);
        CHECK(sw.w_k == BinaryWeights{1, 0, 1, 0});
    }
}

TEST_CASE("filter config validation") {
    FilterConfig cfg;
    cfg.eps1 = 1.5;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.eps1 = 0.02;
    cfg.eps2_percent = 100.0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
}
