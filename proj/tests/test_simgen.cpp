#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "goal/simgen.hpp"
#include "goal/weights.hpp"

using namespace goal;

TEST(PaperScenario, Dimensions) {
    const struct {
        Index n, p, q;
    } cases[] = {{100, 35, 3}, {200, 51, 5}, {400, 75, 8}};
    for (const auto& c : cases) {
        const Scenario s = paper_scenario(c.n, 0.0, 1);
        EXPECT_EQ(s.p, c.p);
        EXPECT_EQ(s.q, c.q);
        EXPECT_EQ(s.beta_A, 0.0);
        EXPECT_EQ(active_set(s).size(), static_cast<std::size_t>(2 * c.q));
    }
    EXPECT_THROW(paper_scenario(10, 0.0, 1), InvalidScenario);
    EXPECT_NO_THROW(paper_scenario(16, 0.0, 1));  // p = 11
}

TEST(PaperScenario, Blocks) {
    const Scenario s = paper_scenario(100, 0.5, 1);
    const RoleMap rm = roles(s);
    for (Index j = 0; j < s.p; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (j < 3) {
            EXPECT_EQ(rm[k], Role::Confounder);
            EXPECT_EQ(s.alpha_star[j], 0.6);
            EXPECT_EQ(s.beta_star[j], 0.6);
        } else if (j < 6) {
            EXPECT_EQ(rm[k], Role::OutcomePredictor);
            EXPECT_EQ(s.alpha_star[j], 0.0);
            EXPECT_EQ(s.beta_star[j], 0.6);
        } else if (j < 9) {
            EXPECT_EQ(rm[k], Role::TreatmentPredictor);
            EXPECT_EQ(s.alpha_star[j], 0.1);
            EXPECT_EQ(s.beta_star[j], 0.0);
        } else {
            EXPECT_EQ(rm[k], Role::Spurious);
        }
    }
    EXPECT_EQ(active_set(s), (std::vector<Index>{0, 1, 2, 3, 4, 5}));
    EXPECT_EQ(inactive_set(s).size(), 29u);
}

TEST(Scenario, Validation) {
    Scenario s = paper_scenario(100, 0.0, 1);
    s.rho = 1.0;
    EXPECT_THROW(validate(s), InvalidScenario);
    s = paper_scenario(100, 0.0, 1);
    s.alpha_star = Vector::Zero(3);
    EXPECT_THROW(validate(s), InvalidScenario);
    s = paper_scenario(100, 0.0, 1);
    s.q = 20;
    EXPECT_THROW(validate(s), InvalidScenario);
    s = paper_scenario(100, 0.0, 1);
    s.n = 1;
    EXPECT_THROW(validate(s), InvalidScenario);
}

TEST(Rng, UniformAndNormalMoments) {
    Rng rng(123);
    const int N = 200000;
    double su = 0, sn = 0, sn2 = 0, sn4 = 0;
    for (int i = 0; i < N; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        sn4 += z * z * z * z;
    }
    EXPECT_NEAR(su / N, 0.5, 4 * std::sqrt(1.0 / 12 / N));
    EXPECT_NEAR(sn / N, 0.0, 4 / std::sqrt(N));
    EXPECT_NEAR(sn2 / N, 1.0, 4 * std::sqrt(2.0 / N));
    EXPECT_NEAR(sn4 / N, 3.0, 4 * std::sqrt(96.0 / N));
}

TEST(Rng, ChildSeedsDistinctAndReproducible) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 10000; ++r) seen.insert(child_seed(42, r));
    EXPECT_EQ(seen.size(), 10000u);
    EXPECT_EQ(child_seed(42, 7), child_seed(42, 7));
    EXPECT_NE(child_seed(42, 7), child_seed(43, 7));
}

TEST(SampleCovariates, IndependentWhenRhoZero) {
    const Index n = 2000, p = 4;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        const Matrix X = sample_covariates(n, p, 0.0, rng);
        const Matrix C = X.transpose() * X / static_cast<double>(n);
        for (Index a = 0; a < p; ++a)
            for (Index b = a + 1; b < p; ++b)
                EXPECT_LE(std::abs(C(a, b) / std::sqrt(C(a, a) * C(b, b))), 4.0 / std::sqrt(double(n)));
    }
}

TEST(SampleCovariates, EquicorrelationLargeSample) {
    Rng rng(99);
    const Index n = 100000;
    const Matrix X = sample_covariates(n, 3, 0.5, rng);
    const Vector mean = X.colwise().mean();
    const Matrix centered = X.rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
    for (Index a = 0; a < 3; ++a) {
        EXPECT_NEAR(cov(a, a), 1.0, 0.02);
        for (Index b = a + 1; b < 3; ++b)
            EXPECT_NEAR(cov(a, b) / std::sqrt(cov(a, a) * cov(b, b)), 0.5, 0.01);
    }
}

TEST(SampleCovariates, RejectsBadRho) {
    Rng rng(1);
    EXPECT_THROW(sample_covariates(10, 2, 1.0, rng), InvalidArgument);
    EXPECT_THROW(sample_covariates(10, 2, -0.1, rng), InvalidArgument);
}

TEST(SampleTreatment, ZeroCoefficients) {
    Rng rng(5);
    const Index n = 10000;
    const Matrix X = sample_covariates(n, 2, 0.0, rng);
    const Vector A = sample_treatment(X, Vector::Zero(2), rng);
    EXPECT_NEAR(A.mean(), 0.5, 4.0 / std::sqrt(double(n)));
    for (Index i = 0; i < n; ++i) EXPECT_TRUE(A[i] == 0.0 || A[i] == 1.0);
}

TEST(SampleTreatment, Saturation) {
    Rng rng(6);
    const Matrix X = Matrix::Constant(200, 1, 1.0);
    Vector a(1);
    a[0] = 1e6;
    EXPECT_EQ(sample_treatment(X, a, rng), Vector::Ones(200));
}

TEST(SampleTreatment, SymmetricLargeSample) {
    Rng rng(7);
    const Matrix X = sample_covariates(100000, 1, 0.0, rng);
    Vector a(1);
    a[0] = 1.0;
    EXPECT_NEAR(sample_treatment(X, a, rng).mean(), 0.5, 0.01);
    EXPECT_THROW(sample_treatment(X, Vector::Ones(2), rng), DimensionMismatch);
}

TEST(SampleOutcome, PureNoise) {
    Rng rng(8);
    const Index n = 10000;
    const Matrix X = sample_covariates(n, 2, 0.0, rng);
    const Vector Y = sample_outcome(X, Vector::Zero(n), 0.0, Vector::Zero(2), rng);
    const double var = (Y.array() - Y.mean()).square().sum() / double(n - 1);
    EXPECT_NEAR(var, 1.0, 0.1);
}

TEST(SampleOutcome, NoiselessReproducesLinearPredictor) {
    Rng rng(9);
    const Matrix X = sample_covariates(50, 3, 0.3, rng);
    Vector A(50);
    for (Index i = 0; i < 50; ++i) A[i] = i % 2;
    Vector b(3);
    b << 0.6, -1, 2;
    const Vector Y = sample_outcome(X, A, 1.5, b, rng, true);
    EXPECT_EQ(Y, Vector(1.5 * A + X * b));
}

TEST(SampleOutcome, LeastSquaresRecoversCoefficients) {
    Scenario s;
    s.n = 100000;
    s.p = 6;
    s.q = 2;
    s.rho = 0.5;
    s.beta_A = 0.7;
    s.seed = 2024;
    fill_blocks(s);
    const Dataset d = generate_dataset(s, 1);
    const OlsFit f = ols_fit(d);
    EXPECT_NEAR(f.beta_A, s.beta_A, 0.02);
    for (Index j = 0; j < s.p; ++j) EXPECT_NEAR(f.beta[j], s.beta_star[j], 0.02);
}

TEST(GenerateDataset, DeterministicPerReplication) {
    const Scenario s = paper_scenario(100, 0.5, 777);
    const Dataset a = generate_dataset(s, 3);
    const Dataset b = generate_dataset(s, 3);
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.A, b.A);
    EXPECT_EQ(a.Y, b.Y);
    EXPECT_EQ(dataset_checksum(a), dataset_checksum(b));
    const Dataset c = generate_dataset(s, 4);
    EXPECT_NE(dataset_checksum(a), dataset_checksum(c));
    // replications can be generated in any order
    const Dataset c_again = generate_dataset(s, 4);
    EXPECT_EQ(dataset_checksum(c), dataset_checksum(c_again));
    EXPECT_EQ(a.n(), 100);
    EXPECT_EQ(a.p(), 35);
}

TEST(ScenarioHash, SensitiveToEveryField) {
    const Scenario base = paper_scenario(100, 0.0, 1);
    const auto h = scenario_hash(base);
    Scenario s = base;
    s.seed = 2;
    EXPECT_NE(scenario_hash(s), h);
    s = base;
    s.rho = 0.5;
    EXPECT_NE(scenario_hash(s), h);
    s = base;
    s.alpha_star[10] = 0.01;
    EXPECT_NE(scenario_hash(s), h);
    s = base;
    s.beta_A = 1.0;
    EXPECT_NE(scenario_hash(s), h);
    EXPECT_EQ(scenario_hash(base), h);
}

TEST(Roles, ConsistentWithZeroPattern) {
    Scenario s;
    s.p = 4;
    s.q = 1;
    s.alpha_star = Vector(4);
    s.beta_star = Vector(4);
    s.alpha_star << 1, 0, 1, 0;
    s.beta_star << 1, 1, 0, 0;
    EXPECT_EQ(roles(s), (RoleMap{Role::Confounder, Role::OutcomePredictor, Role::TreatmentPredictor, Role::Spurious}));
    EXPECT_EQ(to_string(Role::OutcomePredictor), "outcome_predictor");
}
