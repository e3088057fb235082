#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "asgd/core.hpp"
#include "asgd/stats.hpp"

using namespace asgd;

TEST(SparseVector, CanonicalizesUnsortedDuplicatesAndZeros) {
  SparseVector v({{5, 1.0}, {2, 3.0}, {5, 2.0}, {7, 0.0}, {1, 4.0}, {1, -4.0}}, 10);
  ASSERT_EQ(v.nnz(), 2u);
  EXPECT_EQ(v.entries()[0], (Feature{2, 3.0}));
  EXPECT_EQ(v.entries()[1], (Feature{5, 3.0}));
  EXPECT_EQ(v.dim(), 10u);
  EXPECT_EQ(v.extent(), 6u);
  EXPECT_DOUBLE_EQ(v.squared_norm(), 18.0);
}

TEST(SparseVector, IndexPastDimIsStructuralError) {
  EXPECT_THROW(SparseVector({{3, 1.0}}, 3), structural_error);
}

TEST(SparseVector, FromPairsSetsDimToExtent) {
  auto v = SparseVector::from_pairs({{9, 1.0}, {0, 2.0}});
  EXPECT_EQ(v.dim(), 10u);
  EXPECT_TRUE(SparseVector::from_pairs({}).empty());
}

TEST(SparseVector, PushBackMustStayOrdered) {
  SparseVector v({{1, 1.0}}, 2);
  v.push_back({4, 1.0});
  EXPECT_EQ(v.dim(), 5u);
  EXPECT_THROW(v.push_back({4, 2.0}), structural_error);
  v.push_back({6, 0.0});  // zeros are not stored
  EXPECT_EQ(v.nnz(), 2u);
}

TEST(Dot, Examples) {
  EXPECT_EQ(dot(SparseVector{}, DenseVector{1, 2}), 0.0);
  EXPECT_EQ(dot(SparseVector({{0, 1.0}}, 2), DenseVector{3, 5}), 3.0);
  EXPECT_EQ(dot(SparseVector({{1, 2.0}, {3, -1.0}}, 4), DenseVector{0, 4, 0, 7}), 1.0);
}

TEST(Dot, OutOfRange) {
  EXPECT_THROW(dot(SparseVector({{4, 1.0}}, 5), DenseVector(4, 0.0)), structural_error);
}

TEST(AxpySparse, Examples) {
  DenseVector w{1, 2, 3};
  axpy_sparse(0.0, SparseVector({{0, 1.0}}, 3), w);
  EXPECT_EQ(w, (DenseVector{1, 2, 3}));

  DenseVector z(3, 0.0);
  axpy_sparse(1.0, SparseVector({{2, 3.0}}, 3), z);
  EXPECT_EQ(z, (DenseVector{0, 0, 3}));

  DenseVector f{5, 5};
  axpy_sparse(-2.0, SparseVector({{0, 1.0}, {1, 1.0}}, 2), f);
  EXPECT_EQ(f, (DenseVector{3, 3}));
}

TEST(AxpySparse, NonFiniteScaleIsNumericError) {
  DenseVector w(2, 0.0);
  EXPECT_THROW(axpy_sparse(std::numeric_limits<double>::infinity(), SparseVector({{0, 1.0}}, 2), w),
               numeric_error);
  EXPECT_THROW(axpy_sparse(std::nan(""), SparseVector({{0, 1.0}}, 2), w), numeric_error);
}

TEST(LinearModel, RejectsNonFiniteWeights) {
  EXPECT_THROW(LinearModel(DenseVector{1.0, std::nan("")}), numeric_error);
  EXPECT_EQ(LinearModel(3).weights, DenseVector(3, 0.0));
}

TEST(Stats, MeanStderrMatchesHandValues) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto ms = mean_stderr(xs);
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  // sample sd = sqrt(5/3); stderr = sd / 2
  EXPECT_NEAR(ms.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
}

TEST(Stats, CompensatedSumRecoversCancellation) {
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1.0);
}
