#include <random>

#include <gtest/gtest.h>

#include "rankscope/random.hpp"
#include "rankscope/tensor.hpp"

using namespace rankscope;
using namespace rankscope::basis;

TEST(Kron, IdentityLeftFactorIsBlockDiagonal) {
  EXPECT_EQ(kron(eye(2), rot()), block_diag({rot(), rot()}));
}

TEST(Kron, RotOnIdentity) {
  const IntMat want{{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}};
  EXPECT_EQ(kron(rot(), eye(2)), want);
}

TEST(Kron, SwapOnRot) {
  const IntMat want{{0, 0, 0, 1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {-1, 0, 0, 0}};
  EXPECT_EQ(kron(swap(), rot()), want);
}

TEST(Kron, AssociativeOnRandomIntegerMatrices) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(-3, 3);
  auto rnd = [&](std::size_t r, std::size_t c) {
    IntMat m(r, c);
    for (auto& v : m.entries()) v = u(rng);
    return m;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const IntMat a = rnd(2, 3), b = rnd(3, 1), c = rnd(2, 2);
    EXPECT_EQ(kron(kron(a, b), c), kron(a, kron(b, c)));
  }
}

TEST(Kron, ExactChainsDoNotOverflow) {
  IntMat big{{Integer(1) << 40}};
  const IntMat sq = kron(big, big);
  EXPECT_EQ(sq(0, 0), Integer(1) << 80);
}

TEST(BlockDiag, SingleAndScalarBlocks) {
  EXPECT_EQ(block_diag({eye(1)}), eye(1));
  EXPECT_EQ(block_diag({IntMat{{1}}, IntMat{{2}}}), (IntMat{{1, 0}, {0, 2}}));
}

TEST(BlockDiag, RejectsEmpty) {
  EXPECT_THROW(block_diag(std::span<const IntMat>{}), Error);
}

TEST(SubBlock, Prefixes) {
  EXPECT_EQ(sub_block(eye(4), Slab::ColsPrefix, 3), eye(4).block(0, 0, 4, 3));
  const IntMat qa = kron(flip(), rot());
  EXPECT_EQ(sub_block(qa, Slab::RowsSuffix, 2), (IntMat{{0, 0, 0, -1}, {0, 0, 1, 0}}));
}

TEST(SubBlock, PrefixIdempotenceAndWidthAccounting) {
  const IntMat m = kron(swap(), rot());
  for (std::size_t k = 0; k <= 4; ++k) {
    EXPECT_EQ(sub_block(sub_block(m, Slab::ColsPrefix, 4), Slab::ColsPrefix, k), sub_block(m, Slab::ColsPrefix, k));
    const IntMat pre = sub_block(m, Slab::ColsPrefix, k);
    EXPECT_EQ(sub_block(pre, Slab::ColsSuffix, 0), pre);
    EXPECT_EQ(pre.cols() + sub_block(m, Slab::ColsSuffix, k).cols(), m.cols());
  }
}

TEST(SubBlock, OutOfRange) {
  EXPECT_THROW(sub_block(eye(3), Slab::RowsPrefix, 4), Error);
  try {
    sub_block(eye(3), Slab::ColsSuffix, 5);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadIndex);
  }
}

TEST(Tensor3, RejectsInconsistentSlices) {
  EXPECT_THROW(IntTensor({eye(2), eye(3)}), Error);
  EXPECT_THROW(IntTensor(std::vector<IntMat>{}), Error);
}

TEST(Sandwich, IdentityAndScalar) {
  const IntTensor t({eye(2), rot()});
  EXPECT_EQ(sandwich(eye(2), t, eye(2)), t);
  const IntTensor doubled = sandwich(IntMat(eye(2) * Integer(2)), t, eye(2));
  EXPECT_EQ(doubled.p(), 2u);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(doubled.slice(k), t.slice(k) * Integer(2));
}

TEST(Sandwich, ShapeMismatch) {
  const IntTensor t({eye(2), rot()});
  EXPECT_THROW(sandwich(eye(3), t, eye(2)), Error);
}

TEST(Sandwich, Composes) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const IntTensor t = random_int_tensor(rng, 3, 2, 3, -4, 4);
    const IntTensor pq = random_int_tensor(rng, 3, 3, 2, -2, 2);
    const IntTensor qq = random_int_tensor(rng, 2, 2, 2, -2, 2);
    const IntMat &p1 = pq.slice(0), &p2 = pq.slice(1), &q1 = qq.slice(0), &q2 = qq.slice(1);
    EXPECT_EQ(sandwich(p2, sandwich(p1, t, q1), q2), sandwich(IntMat(p2 * p1), t, IntMat(q1 * q2)));
  }
}

TEST(FlattenRanks, Examples) {
  EXPECT_EQ(flatten_ranks(IntTensor({eye(2), rot()})), (FlattenRanks{2, 2}));
  EXPECT_EQ(flatten_ranks(IntTensor::zeros(2, 3, 2)), (FlattenRanks{0, 0}));
  // a (x) b (x) c with all entries nonzero
  const IntMat ab{{2, -1, 3}, {4, -2, 6}};
  EXPECT_EQ(flatten_ranks(IntTensor({ab, IntMat(ab * Integer(-3)), IntMat(ab * Integer(5))})), (FlattenRanks{1, 1}));
}

TEST(FlattenRanks, ExactAgreesWithNumericOnRandomIntegers) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> dim(1, 4);
    // small entry range makes rank deficiency common
    const IntTensor t = random_int_tensor(rng, dim(rng), dim(rng), dim(rng), -1, 1);
    EXPECT_EQ(flatten_ranks(t), flatten_ranks(to_real(t)));
  }
}

TEST(Matrix, ConvertsExplicitlyToReal) {
  const RealMat r = to_real(rot());
  EXPECT_DOUBLE_EQ(r(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(r(1, 0), -1.0);
  static_assert(IntMat::kind() == Kind::ExactInt);
  static_assert(RealMat::kind() == Kind::Real);
}
