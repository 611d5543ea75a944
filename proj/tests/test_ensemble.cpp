#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "densemble/ensemble.hpp"
#include "support/gradcheck.hpp"

using namespace densemble;
namespace ts = densemble::testsupport;

namespace {

DenseNet net_with_fixed_output(const std::vector<double>& probs, std::size_t input_dim) {
    DenseNet net = make_dense_net({input_dim, probs.size()}, 0);
    for (auto& w : net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    for (auto& b : net.biases) std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t j = 0; j < probs.size(); ++j) net.biases[0][j] = std::log(probs[j]);
    return net;
}

Ensemble fixed_ensemble(const std::vector<std::vector<double>>& member_rows, std::size_t input_dim) {
    Ensemble ens;
    for (const auto& row : member_rows) ens.members.push_back(net_with_fixed_output(row, input_dim));
    return ens;
}

} // namespace

TEST_CASE("vote: a single member votes as itself") {
    Ensemble ens = make_ensemble(1, {4, 6, 3}, 17);
    Rng rng(1);
    Matrix x = ts::random_batch(5, 4, rng);
    CHECK(vote(ens, x).data == forward(ens.members[0], x).data);
}

TEST_CASE("vote: opposite one-hot members average to one half") {
    Ensemble ens;
    ens.members.push_back(net_with_fixed_output({1.0 - 1e-12, 1e-12}, 2));
    ens.members.push_back(net_with_fixed_output({1e-12, 1.0 - 1e-12}, 2));
    Matrix x(3, 2);
    Matrix mean = vote(ens, x);
    for (std::size_t i = 0; i < mean.rows; ++i) {
        CHECK(mean(i, 0) == Catch::Approx(0.5).margin(1e-9));
        CHECK(mean(i, 1) == Catch::Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("vote and all confidence statistics are invariant under member permutation") {
    Ensemble ens = make_ensemble(4, {3, 5, 4}, 23);
    Rng rng(2);
    Matrix x = ts::random_batch(6, 3, rng);
    std::vector<int> y = ts::random_labels(6, 4, rng);
    ConfidenceReport before = build_report(ens, x, &y);
    std::rotate(ens.members.begin(), ens.members.begin() + 1, ens.members.end());
    ConfidenceReport after = build_report(ens, x, &y);
    for (std::size_t i = 0; i < before.mean_probs.data.size(); ++i)
        CHECK(before.mean_probs.data[i] == Catch::Approx(after.mean_probs.data[i]).margin(1e-12));
    for (std::size_t i = 0; i < before.m_con.size(); ++i) {
        CHECK(before.m_con[i] == Catch::Approx(after.m_con[i]).margin(1e-12));
        CHECK(before.l_con[i] == Catch::Approx(after.l_con[i]).margin(1e-12));
        CHECK(before.total_unc[i] == Catch::Approx(after.total_unc[i]).margin(1e-12));
        CHECK(before.data_unc[i] == Catch::Approx(after.data_unc[i]).margin(1e-12));
        CHECK(before.model_unc[i] == Catch::Approx(after.model_unc[i]).margin(1e-12));
    }
}

TEST_CASE("vote: empty ensemble is a config error") {
    Ensemble ens;
    CHECK_THROWS_AS(vote(ens, Matrix(1, 2)), ConfigError);
    CHECK_THROWS_AS(make_ensemble(0, {2, 2}, 0), ConfigError);
}

TEST_CASE("l_con: direct cases") {
    Matrix x(1, 2);
    SECTION("one-hot mean at the label is 1") {
        Ensemble ens = fixed_ensemble({{1.0 - 1e-12, 1e-12}}, 2);
        CHECK(l_con(ens, x, {0})[0] == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("uniform mean over 100 classes is 0.01") {
        std::vector<double> uniform(100, 0.01);
        Ensemble ens = fixed_ensemble({uniform, uniform}, 2);
        CHECK(l_con(ens, x, {42})[0] == Catch::Approx(0.01).margin(1e-12));
    }
    SECTION("members (0.6,0.4) and (0.2,0.8) at label 0 give 0.4") {
        Ensemble ens = fixed_ensemble({{0.6, 0.4}, {0.2, 0.8}}, 2);
        CHECK(l_con(ens, x, {0})[0] == Catch::Approx(0.4).margin(1e-12));
    }
    SECTION("label out of range throws") {
        Ensemble ens = fixed_ensemble({{0.5, 0.5}}, 2);
        CHECK_THROWS_AS(l_con(ens, x, {2}), std::out_of_range);
    }
}

TEST_CASE("m_con: direct cases") {
    Matrix x(1, 2);
    SECTION("uniform mean over 10 classes gives the minimum 0.1") {
        std::vector<double> uniform(10, 0.1);
        Ensemble ens = fixed_ensemble({uniform}, 2);
        CHECK(m_con(ens, x)[0] == Catch::Approx(0.1).margin(1e-12));
    }
    SECTION("one-hot mean gives 1") {
        Ensemble ens = fixed_ensemble({{1e-12, 1.0 - 1e-12}}, 2);
        CHECK(m_con(ens, x)[0] == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("mean row (0.2, 0.5, 0.3) gives 0.5") {
        Ensemble ens = fixed_ensemble({{0.2, 0.5, 0.3}}, 2);
        CHECK(m_con(ens, x)[0] == Catch::Approx(0.5).margin(1e-12));
    }
}

TEST_CASE("uncertainty decomposition: identical members have zero model uncertainty") {
    DenseNet net = make_dense_net({4, 8, 3}, 5);
    Ensemble ens;
    ens.members = {net, net, net};
    Rng rng(6);
    Matrix x = ts::random_batch(7, 4, rng);
    auto [total, data, model] = uncertainty_decomposition(ens, x);
    for (std::size_t i = 0; i < total.size(); ++i) {
        CHECK(std::abs(model[i]) <= 1e-9);
        CHECK(total[i] == Catch::Approx(data[i]).margin(1e-9));
    }
}

TEST_CASE("uncertainty decomposition: maximal disagreement gives model = ln 2") {
    Ensemble ens = fixed_ensemble({{1.0 - 1e-15, 1e-15}, {1e-15, 1.0 - 1e-15}}, 2);
    Matrix x(1, 2);
    auto [total, data, model] = uncertainty_decomposition(ens, x);
    CHECK(total[0] == Catch::Approx(std::log(2.0)).margin(1e-9));
    CHECK(data[0] == Catch::Approx(0.0).margin(1e-9));
    CHECK(model[0] == Catch::Approx(std::log(2.0)).margin(1e-9));
}

TEST_CASE("uncertainty decomposition: frozen two-member values") {
    Ensemble ens = fixed_ensemble({{0.7, 0.3}, {0.5, 0.5}}, 2);
    Matrix x(1, 2);
    auto [total, data, model] = uncertainty_decomposition(ens, x);
    CHECK(total[0] == Catch::Approx(0.6730116670092565).margin(1e-9));
    CHECK(data[0] == Catch::Approx(0.6520057413074194).margin(1e-9));
    CHECK(model[0] == Catch::Approx(0.021005925701837125).margin(1e-9));
}

TEST_CASE("decomposition identity and non-negativity on random ensembles") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const std::size_t m = 1 + rng.uniform_below(4);
        const std::size_t classes = 2 + rng.uniform_below(5);
        Ensemble ens = make_ensemble(m, {5, 6, classes}, seed);
        Matrix x = ts::random_batch(4, 5, rng, -2.0, 2.0);
        ConfidenceReport rep = build_report(ens, x, nullptr);
        for (std::size_t i = 0; i < rep.total_unc.size(); ++i) {
            CHECK(std::abs(rep.total_unc[i] - rep.data_unc[i] - rep.model_unc[i]) <= 1e-9);
            CHECK(rep.model_unc[i] >= -1e-9);
            CHECK(rep.m_con[i] >= 1.0 / static_cast<double>(classes) - 1e-12);
            CHECK(rep.m_con[i] <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("confidence report: l_con requires labels and lies in [0,1]") {
    Ensemble ens = make_ensemble(3, {4, 5, 3}, 2);
    Rng rng(3);
    Matrix x = ts::random_batch(6, 4, rng);
    ConfidenceReport without = build_report(ens, x, nullptr);
    CHECK(without.l_con.empty());
    std::vector<int> y = ts::random_labels(6, 3, rng);
    ConfidenceReport with = build_report(ens, x, &y);
    for (double v : with.l_con) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("mi loss: single member has zero loss and gradient") {
    Ensemble ens = make_ensemble(1, {4, 6, 3}, 11);
    Rng rng(4);
    Matrix x = ts::random_batch(5, 4, rng);
    MiLossResult result = mi_loss_and_grad(ens, 0, x);
    CHECK(result.loss == 0.0);
    for (double g : ts::flatten(result.member_grads)) CHECK(g == 0.0);
}

TEST_CASE("mi loss: identical members sit at a symmetric stationary point") {
    DenseNet net = make_dense_net({3, 5, 4}, 19);
    Ensemble ens;
    ens.members = {net, net};
    Rng rng(5);
    Matrix x = ts::random_batch(4, 3, rng);
    MiLossResult result = mi_loss_and_grad(ens, 0, x);
    CHECK(result.loss == Catch::Approx(0.0).margin(1e-12));

    std::vector<double> analytic = ts::flatten(result.member_grads);
    std::vector<double> numeric =
        ts::central_differences(ens.members[0], [&] { return mi_loss_and_grad(ens, 0, x).loss; });
    CHECK(ts::compare_gradients(analytic, numeric).max_rel_err < 1e-4);
}

TEST_CASE("mi loss gradient matches finite differences on random ensembles") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed + 31);
        Ensemble ens = make_ensemble(2, {4, 7, 3}, seed);
        Matrix x = ts::random_batch(4, 4, rng);
        const std::size_t target = seed % 2;
        MiLossResult result = mi_loss_and_grad(ens, target, x);
        CHECK(result.loss >= -1e-12);
        std::vector<double> analytic = ts::flatten(result.member_grads);
        std::vector<double> numeric =
            ts::central_differences(ens.members[target], [&] { return mi_loss_and_grad(ens, target, x).loss; });
        ts::GradCheck check = ts::compare_gradients(analytic, numeric);
        INFO("seed " << seed << " worst analytic " << check.analytic_at_worst << " numeric "
                     << check.numeric_at_worst);
        CHECK(check.max_rel_err < 1e-4);
    }
}

TEST_CASE("mi loss equals the mean model uncertainty of the batch") {
    Ensemble ens = make_ensemble(3, {4, 6, 5}, 40);
    Rng rng(8);
    Matrix x = ts::random_batch(6, 4, rng);
    auto [total, data, model] = uncertainty_decomposition(ens, x);
    double mean_model = 0.0;
    for (double v : model) mean_model += v;
    mean_model /= static_cast<double>(model.size());
    for (std::size_t m = 0; m < ens.size(); ++m) {
        CHECK(mi_loss_and_grad(ens, m, x).loss == Catch::Approx(mean_model).margin(1e-12));
    }
    CHECK_THROWS_AS(mi_loss_and_grad(ens, 3, x), ConfigError);
}
