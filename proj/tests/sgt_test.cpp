#include <gtest/gtest.h>

#include <numeric>

#include "miggt/sgt.hpp"
#include "test_util.hpp"

using namespace miggt;
using miggt::testutil::random_matrix;

namespace {

AttentionParams random_params(std::size_t d, std::size_t d_att, double gamma, std::size_t c, Rng& rng) {
  return {random_matrix(d, d_att, rng), random_matrix(d, d_att, rng), gamma, c};
}

Matrix row_mean(const Matrix& s) {
  Matrix m(1, s.cols());
  for (std::size_t r = 0; r < s.rows(); ++r) axpy(1.0 / static_cast<double>(s.rows()), s.row(r), m.row(0));
  return m;
}

}  // namespace

TEST(SampleBlock, ZeroSamplesIsAnchorRow) {
  Rng rng(1);
  const Matrix z = random_matrix(5, 3, rng);
  const auto b = sample_block(z, 2, 0, rng);
  ASSERT_EQ(b.stacked.rows(), 1u);
  EXPECT_TRUE(std::equal(b.stacked.row(0).begin(), b.stacked.row(0).end(), z.row(2).begin()));
}

TEST(SampleBlock, ReproducibleUnderSeed) {
  const Matrix z(4, 2);
  Rng a(77), b(77);
  const auto x = sample_block(z, 0, 2, a);
  const auto y = sample_block(z, 0, 2, b);
  EXPECT_EQ(x.sampled, y.sampled);
  ASSERT_EQ(x.sampled.size(), 2u);
  for (const auto i : x.sampled) EXPECT_LT(i, 4u);
}

TEST(SampleBlock, UniformOverVertices) {
  Rng rng(3);
  const auto draws = sample_vertices(10, 100000, rng);
  std::vector<double> freq(10, 0.0);
  for (const auto i : draws) freq[i] += 1.0 / 100000.0;
  for (const double f : freq) EXPECT_NEAR(f, 0.1, 0.01);
}

TEST(SampleBlock, AnchorOutOfRange) {
  Rng rng(4);
  EXPECT_THROW(sample_block(Matrix(3, 2), 3, 1, rng), RangeError);
}

TEST(Attend, FullResidualIsIdentity) {
  Rng rng(5);
  const Matrix s = random_matrix(4, 3, rng);
  EXPECT_EQ(attend(s, random_params(3, 2, 1.0, 3, rng)), s);
}

TEST(Attend, ZeroProjectionsGiveUniformAttention) {
  Rng rng(6);
  const Matrix s = random_matrix(5, 4, rng);
  const double g = 0.3;
  const AttentionParams p{Matrix(4, 2), Matrix(4, 2), g, 4};
  const Matrix t = attend(s, p);
  const Matrix mean = row_mean(s);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(t(r, c), (1 - g) * mean(0, c) + g * s(r, c), 1e-12);
}

TEST(Attend, SingleRowIsIdentity) {
  Rng rng(7);
  const Matrix s = random_matrix(1, 4, rng);
  EXPECT_LT(max_abs_diff(attend(s, random_params(4, 3, 0.37, 0, rng)), s), 1e-15);
}

TEST(Attend, ShapeMismatch) {
  Rng rng(8);
  EXPECT_THROW(attend(random_matrix(3, 4, rng), random_params(5, 2, 0.5, 2, rng)), DimensionError);
}

TEST(Attend, RowsOfAttentionSumToOne) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix s = random_matrix(6, 4, rng, 3.0);
    AttentionTrace trace;
    attend(s, random_params(4, 3, 0.5, 5, rng), &trace);
    for (std::size_t r = 0; r < 6; ++r) {
      const auto row = trace.probs.row(r);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
    }
  }
}

TEST(Attend, EquivariantUnderSampledRowPermutation) {
  Rng rng(10);
  const Matrix s = random_matrix(5, 4, rng);
  const auto p = random_params(4, 3, 0.4, 4, rng);
  const std::vector<std::size_t> perm{0, 3, 1, 4, 2};
  Matrix ps(5, 4);
  for (std::size_t r = 0; r < 5; ++r) std::copy(s.row(perm[r]).begin(), s.row(perm[r]).end(), ps.row(r).begin());
  const Matrix t = attend(s, p);
  const Matrix pt = attend(ps, p);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(pt(r, c), t(perm[r], c), 1e-13);
}

TEST(Attend, ScalesByModelDimension) {
  // one query/key pair with a known logit gap; d = 4 so the divisor is 2
  Matrix s(2, 4);
  s(0, 0) = 1.0;
  s(1, 1) = 1.0;
  Matrix wq(4, 1), wk(4, 1);
  wq(0, 0) = 1.0;
  wk(0, 0) = 2.0;  // logits row 0: [2/2, 0/2]
  AttentionTrace trace;
  attend(s, {wq, wk, 0.0, 1}, &trace);
  EXPECT_NEAR(trace.probs(0, 0), std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-15);
}

TEST(Attend, GradientsMatchFiniteDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix s = random_matrix(4, 4, rng);
    auto p = random_params(4, 3, 0.35, 3, rng);
    const Matrix upstream = random_matrix(4, 4, rng);
    auto loss = [&] {
      const Matrix t = attend(s, p);
      return dot(t.data(), upstream.data());
    };
    AttentionTrace trace;
    attend(s, p, &trace);
    const auto g = attend_backward(s, p, trace, upstream);
    EXPECT_LT(testutil::max_relative_error(g.d_w_query, testutil::numeric_gradient(p.w_query, loss)), 1e-4);
    EXPECT_LT(testutil::max_relative_error(g.d_w_key, testutil::numeric_gradient(p.w_key, loss)), 1e-4);
    EXPECT_LT(testutil::max_relative_error(g.d_stacked, testutil::numeric_gradient(s, loss)), 1e-4);
  }
}

TEST(FinalRepresentation, Cases) {
  Rng rng(12);
  const Matrix z = random_matrix(6, 3, rng);
  auto block = sample_block(z, 1, 3, rng);
  EXPECT_THROW(final_representation(block), Error);

  attend(block, random_params(3, 2, 1.0, 3, rng));
  EXPECT_EQ(final_representation(block), std::vector<double>(z.row(1).begin(), z.row(1).end()));

  auto single = sample_block(z, 4, 0, rng);
  attend(single, random_params(3, 2, 0.2, 0, rng));
  const auto rep = final_representation(single);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(rep[c], z(4, c), 1e-15);

  auto uniform = sample_block(z, 0, 4, rng);
  attend(uniform, AttentionParams{Matrix(3, 2), Matrix(3, 2), 0.6, 4});
  const Matrix mean = row_mean(uniform.stacked);
  const auto u = final_representation(uniform);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(u[c], 0.4 * mean(0, c) + 0.6 * z(0, c), 1e-12);
}

TEST(EvaluateRepresentations, FullResidualReturnsFused) {
  Rng rng(13);
  const Matrix z = random_matrix(8, 3, rng);
  for (std::size_t repeats : {1u, 3u, 7u})
    EXPECT_EQ(evaluate_representations(z, random_params(3, 2, 1.0, 4, rng), 5, repeats), z);
}

TEST(EvaluateRepresentations, Deterministic) {
  Rng rng(14);
  const Matrix z = random_matrix(8, 3, rng);
  const auto p = random_params(3, 2, 0.5, 4, rng);
  EXPECT_EQ(evaluate_representations(z, p, 99, 1), evaluate_representations(z, p, 99, 1));
  EXPECT_NE(evaluate_representations(z, p, 99, 1), evaluate_representations(z, p, 100, 1));
  EXPECT_THROW(evaluate_representations(z, p, 99, 0), RangeError);
}

TEST(EvaluateRepresentations, ConvergesToGlobalMeanMixture) {
  Rng rng(15);
  const std::size_t n = 20, c = 5;
  const double g = 0.25;
  const Matrix z = random_matrix(n, 3, rng);
  const Matrix global = row_mean(z);
  const Matrix out = evaluate_representations(z, {Matrix(3, 2), Matrix(3, 2), g, c}, 3, 4000);
  // The anchor is row 0 of its own block, so the attended mean is
  // (z_i + C * global) / (C + 1) in expectation.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double block_mean = (z(i, k) + static_cast<double>(c) * global(0, k)) / static_cast<double>(c + 1);
      EXPECT_NEAR(out(i, k), (1 - g) * block_mean + g * z(i, k), 0.02);
    }
  }
}

TEST(Attend, AnchorRowOnlyMatchesFullBlock) {
  Rng rng(31);
  const Matrix s = random_matrix(5, 4, rng), q = random_matrix(5, 3, rng), k = random_matrix(5, 3, rng);
  const double gamma = 0.3;
  AttentionTrace full_trace, row_trace;
  const Matrix full = attend_projected(s, q, k, gamma, &full_trace);
  const Matrix q0 = gather_rows(q, 0, {});
  const Matrix row = attend_projected(s, q0, k, gamma, &row_trace);
  ASSERT_EQ(row.rows(), 1u);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(row(0, c), full(0, c));

  Matrix d_row = random_matrix(1, 4, rng);
  Matrix d_full(5, 4);
  std::copy(d_row.row(0).begin(), d_row.row(0).end(), d_full.row(0).begin());
  Matrix ds_full(5, 4), dq_full(5, 3), dk_full(5, 3);
  Matrix ds_row(5, 4), dq_row(1, 3), dk_row(5, 3);
  attend_projected_backward(s, q, k, gamma, full_trace, d_full, ds_full, dq_full, dk_full);
  attend_projected_backward(s, q0, k, gamma, row_trace, d_row, ds_row, dq_row, dk_row);
  EXPECT_LT(max_abs_diff(ds_row, ds_full), 1e-14);
  EXPECT_LT(max_abs_diff(dk_row, dk_full), 1e-14);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(dq_row(0, c), dq_full(0, c), 1e-14);
  EXPECT_THROW(attend_projected(s, random_matrix(6, 3, rng), k, gamma), DimensionError);
}
