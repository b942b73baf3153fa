#include <gtest/gtest.h>

#include "cmlab/calg.hpp"

using namespace cmlab;

namespace {

class LemmaSuites : public ::testing::TestWithParam<std::string> {};

TEST_P(LemmaSuites, NoCounterexample) {
  SuiteResult r = run_lemma_suite(GetParam(), 60, 2024);
  EXPECT_EQ(r.trials, 60);
  EXPECT_TRUE(r.passed()) << r.name << ": " << r.failures << " failures; " << r.witness;
}

INSTANTIATE_TEST_SUITE_P(All, LemmaSuites, ::testing::ValuesIn(lemma_suite_names()),
                         [](const auto& info) { return info.param; });

TEST(LemmaSuites, ModulusDegreeAgreementAtFullSize) {
  SuiteResult r = run_lemma_suite("modulus_degree_equivalence", 200, 7);
  EXPECT_TRUE(r.passed()) << r.witness;
}

TEST(LemmaSuites, TakagiFaultIsDetected) {
  set_takagi_fault(true);
  SuiteResult r = run_lemma_suite("modulus_degree_equivalence", 40, 3);
  set_takagi_fault(false);
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(r.witness.empty());
}

TEST(LemmaSuites, ZeroTrialsIsVacuous) {
  SuiteResult r = run_lemma_suite("kappa_reality", 0, 1);
  EXPECT_EQ(r.trials, 0);
  EXPECT_TRUE(r.passed());
}

TEST(LemmaSuites, UnknownNameThrows) {
  EXPECT_THROW(run_lemma_suite("no_such_suite", 1, 1), Error);
}

TEST(LemmaPredicates, EntrySizeSmallEntries) {
  CMat A(2, 2), B(2, 2);
  A << 0.2, cplx(0, 0.2), cplx(0, -0.2), 0.2;
  B << 0.2, 0.2, 0.2, 0.2;
  PredicateResult p = predicate_entry_size(A, B);
  EXPECT_TRUE(p.hypothesis);
  EXPECT_TRUE(p.conclusion);
  // eigenvalues of A are 0 and 0.4, of B B^H 0 and 0.16
  EXPECT_NEAR(1.0 - p.margin, 0.4, 1e-12);
}

TEST(LemmaPredicates, EntrySizeHypothesisFails) {
  CMat A = CMat::Identity(2, 2) * 0.3, B = CMat::Zero(2, 2);
  PredicateResult p = predicate_entry_size(A, B);
  EXPECT_FALSE(p.hypothesis);
  EXPECT_TRUE(p.passed());
}

TEST(LemmaPredicates, MetricKappaExample) {
  // A = I, K max 0.5, delta 0.5, G = I: modulus 1 - sqrt(0.5) >= 0.125
  CMat A = CMat::Identity(1, 1), B(1, 1);
  B << std::sqrt(0.5);
  PredicateResult p = predicate_metric_kappa(QuadraticGauge::make(A, B), MetricForm::identity(1), 0.5 - 1e-12);
  EXPECT_TRUE(p.hypothesis);
  EXPECT_TRUE(p.conclusion);
  EXPECT_NEAR(p.margin, 1 - std::sqrt(0.5) - 0.125, 1e-6);
}

TEST(LemmaPredicates, HalfPerturbationExample) {
  // modulus just above 0.4 with V = 0.2 G and |W|_G = 0.2
  CMat A = CMat::Identity(2, 2), B = CMat::Identity(2, 2) * 0.59;
  MetricForm g = MetricForm::identity(2);
  QuadraticGauge q = QuadraticGauge::make(A, B);
  ASSERT_NEAR(modulus_of_convexity(q, g).value, 0.41, 1e-12);
  CMat W(2, 2);
  W << 0, 0.2, 0.2, 0;
  PredicateResult p = predicate_half_perturbation(q, g, 0.4, 0.2 * g.G, W);
  EXPECT_TRUE(p.hypothesis);
  EXPECT_TRUE(p.conclusion);
  EXPECT_GT(p.margin, 0.0);
}

TEST(LemmaPredicates, HalfPerturbationRejectsOversizedV) {
  CMat A = CMat::Identity(1, 1), B = CMat::Zero(1, 1);
  PredicateResult p = predicate_half_perturbation(QuadraticGauge::make(A, B), MetricForm::identity(1), 0.5,
                                                  CMat::Identity(1, 1), CMat::Zero(1, 1));
  EXPECT_FALSE(p.hypothesis);
}

TEST(LemmaPredicates, KappaGapExample) {
  // A = I, B = 0.5: modulus 0.5, K = 0.25 <= 1 - 0.5/2
  CMat A = CMat::Identity(1, 1), B(1, 1);
  B << 0.5;
  PredicateResult p = predicate_kappa_gap(QuadraticGauge::make(A, B), MetricForm::identity(1), 0.5 - 1e-12);
  EXPECT_TRUE(p.hypothesis);
  EXPECT_TRUE(p.conclusion);
  EXPECT_NEAR(p.margin, 0.5, 1e-6);
}

}  // namespace
