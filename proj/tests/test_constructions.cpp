#include <gtest/gtest.h>

#include "rankscope/constructions.hpp"

using namespace rankscope;
using namespace rankscope::basis;

namespace {

struct CaseN {
  MiscCase c;
  std::size_t n;
};

const CaseN kCases[] = {{MiscCase::M3, 3}, {MiscCase::M3, 7},  {MiscCase::M4, 6},
                        {MiscCase::M4, 10}, {MiscCase::M6, 12}, {MiscCase::M10, 24}};

// Independent restatement of the construction for M3 with u = 1.
IntTensor m3_by_hand() {
  IntMat s1{{0, 0, 1}, {0, 0, 0}, {-1, 0, 0}, {0, -1, 0}};
  IntMat s2{{0, 0, 0}, {0, 0, -1}, {0, 1, 0}, {-1, 0, 0}};
  IntMat s3{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 0}};
  return IntTensor({s1, s2, s3});
}

}  // namespace

TEST(BuildMisc, M3SmallestMatchesHandCopy) {
  // A (x) E_2 and P (x) A written out entrywise.
  EXPECT_EQ(kron(rot(), eye(2)), (IntMat{{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}}));
  EXPECT_EQ(kron(swap(), rot()), (IntMat{{0, 0, 0, 1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {-1, 0, 0, 0}}));
  EXPECT_EQ(build_misc(MiscCase::M3, 3), m3_by_hand());
}

TEST(BuildMisc, ShapesEntriesAndPattern) {
  for (const auto& [c, n] : kCases) {
    const auto ci = info(c);
    const IntTensor t = build_misc(c, n);
    EXPECT_EQ(t.m(), n + ci.l);
    EXPECT_EQ(t.n(), n);
    EXPECT_EQ(t.p(), ci.m);
    for (const auto& s : t.slices())
      for (const auto& e : s.entries()) EXPECT_TRUE(e == 0 || e == 1 || e == -1);
    EXPECT_TRUE(bottom_rows_zero(t, ci.l)) << ci.name << " n=" << n;
    EXPECT_TRUE(exact_certify(build_misc_parent(c, n))) << ci.name << " n=" << n;
  }
}

TEST(BuildMisc, M4BottomRowsOfThirdSlice) {
  const IntTensor t = build_misc(MiscCase::M4, 6);
  for (std::size_t i = 6; i < 8; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(t(i, j, 2), 0);
}

TEST(BuildMisc, BadCongruence) {
  EXPECT_THROW(build_misc(MiscCase::M3, 4), Error);
  EXPECT_THROW(build_misc(MiscCase::M4, 2), Error);
  EXPECT_THROW(build_misc(MiscCase::M6, 4), Error);
  EXPECT_THROW(build_misc(MiscCase::M10, 8), Error);
  try {
    build_misc(MiscCase::M3, 4);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadCongruence);
  }
}

TEST(SpAfrCheck, Examples) {
  EXPECT_TRUE(sp_afr_check(build_misc(MiscCase::M3, 3), 1));
  EXPECT_TRUE(sp_afr_check(ans_tensor(4, 4), 0));

  IntTensor bad = build_misc(MiscCase::M3, 3);
  bad(3, 0, 2) = 1;
  const auto r = sp_afr_report(bad, 1);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.bottom_zero);

  EXPECT_THROW(sp_afr_check(build_misc(MiscCase::M3, 3), 2), Error);
}

TEST(SpAfrCheck, AllCasesPass) {
  for (const auto& [c, n] : kCases) {
    const auto r = sp_afr_report(build_misc(c, n), info(c).l);
    EXPECT_TRUE(r.ok) << info(c).name << " n=" << n;
    EXPECT_EQ(r.verdict.status, AfrStatus::CertifiedExact);
  }
}

TEST(SpAfrCheck, NonAfrWithZeroBottomFails) {
  // Slice 1 = slice 2 gives a vanishing combination.
  IntTensor t = build_misc(MiscCase::M3, 3);
  std::vector<IntMat> s = t.slices();
  s[1] = s[0];
  EXPECT_FALSE(sp_afr_check(IntTensor(s), 1));
}

TEST(SpAfrCheck, WideningKeepsCondition) {
  const IntTensor t = build_misc(MiscCase::M3, 7);
  for (std::size_t l2 = 2; l2 < 7; ++l2) {
    const IntTensor w = widen_sp_afr(t, 1, l2);
    EXPECT_TRUE(sp_afr_check(w, l2)) << l2;
  }
  EXPECT_TRUE(sp_afr_check(ans_to_sp_afr(ans_tensor(4, 3), 2), 2));
  EXPECT_THROW(widen_sp_afr(t, 1, 7), Error);
}

TEST(SeqToStacked, BlockLayout) {
  CondSeq seq{3, 1, 3, RealMat(3, 5), {RealMat::identity(3)}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) seq.a(i, j) = static_cast<double>(10 * i + j + 1);
  const RealTensor s = seq_to_stacked(seq);
  EXPECT_EQ(s.m(), 6u);
  EXPECT_EQ(s.n(), 3u);
  EXPECT_EQ(s.p(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    // slice 1: (B_1 O; B_1 B_0)
    EXPECT_EQ(s(i, 0, 0), seq.a(i, 0));
    EXPECT_EQ(s(i, 2, 0), 0.0);
    EXPECT_EQ(s(i + 3, 1, 0), seq.a(i, 1));
    EXPECT_EQ(s(i + 3, 2, 0), seq.a(i, 2));
    // slice 2: (B_0 B_2; O B_2)
    EXPECT_EQ(s(i, 0, 1), seq.a(i, 2));
    EXPECT_EQ(s(i, 2, 1), seq.a(i, 4));
    EXPECT_EQ(s(i + 3, 0, 1), 0.0);
    EXPECT_EQ(s(i + 3, 1, 1), seq.a(i, 3));
  }
}

TEST(SeqToStacked, ZeroLDuplicatesSlices) {
  CondSeq seq{2, 0, 3, RealMat{{1, 2, 3, 4}, {5, 6, 7, 8}}, {RealMat::identity(2)}};
  const RealTensor s = seq_to_stacked(seq);
  EXPECT_EQ(s.slice(0), vstack({seq.b1(), seq.b1()}));
  EXPECT_EQ(s.slice(1), vstack({seq.b2(), seq.b2()}));
  seq.extras.clear();
  EXPECT_THROW(seq_to_stacked(seq), Error);
}

TEST(SpAfrToSeq, M3RoundTrip) {
  const CondSeq seq = sp_afr_to_seq(build_misc(MiscCase::M3, 3), 1);
  EXPECT_EQ(seq.n, 3u);
  EXPECT_EQ(seq.l, 1u);
  EXPECT_EQ(seq.m, 3u);
  const auto v = afr_check(seq_to_stacked(seq));
  EXPECT_TRUE(v.certified());
}

TEST(SpAfrToSeq, ZeroLIsTrivialSplit) {
  const IntTensor t = ans_tensor(4, 3);
  const CondSeq seq = sp_afr_to_seq(t, 0);
  EXPECT_EQ(seq.b1(), to_real(t.slice(0)));
  EXPECT_EQ(seq.b2(), to_real(t.slice(1)));
  ASSERT_EQ(seq.extras.size(), 1u);
  EXPECT_EQ(seq.extras[0], to_real(t.slice(2)));
}

TEST(SpAfrToSeq, RejectsNonAfr) {
  std::vector<IntMat> s = build_misc(MiscCase::M3, 3).slices();
  s[1] = s[0];
  try {
    sp_afr_to_seq(IntTensor(s), 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Precondition);
  }
}

TEST(SpAfrToSeq, RoundTripOnEveryConstruction) {
  for (const auto& [c, n] : kCases) {
    const auto ci = info(c);
    const CondSeq seq = sp_afr_to_seq(build_misc(c, n), ci.l);
    EXPECT_EQ(seq.m, ci.m);
    const auto v = afr_check(seq_to_stacked(seq));
    EXPECT_FALSE(v.falsified()) << ci.name << " n=" << n;
    if (ci.m <= 4) EXPECT_TRUE(v.certified()) << ci.name << " n=" << n;
  }
}

TEST(SpAfrToSeq, GenericEquivalentInput) {
  // A random equivalence P T Q keeps the condition when P preserves the
  // zero bottom block; the chain must still land on an AFR stacked tensor.
  Rng rng(11);
  const RealTensor t = to_real(build_misc(MiscCase::M3, 7));
  EMat p = gaussian_matrix(rng, 8, 8);
  p.bottomLeftCorner(1, 7).setZero();
  const EMat q = gaussian_matrix(rng, 7, 7);
  const RealTensor u = from_eigen_slices([&] {
    std::vector<EMat> s;
    for (const auto& a : eigen_slices(t)) s.push_back(p * a * q);
    return s;
  }());
  ASSERT_TRUE(sp_afr_check(u, 1));
  const CondSeq seq = sp_afr_to_seq(u, 1);
  EXPECT_FALSE(afr_check(seq_to_stacked(seq)).falsified());
}

TEST(WithIdentityLast, KeepsStackedAfr) {
  const CondSeq seq = sp_afr_to_seq(build_misc(MiscCase::M3, 3), 1);
  const CondSeq norm = with_identity_last(seq);
  EXPECT_EQ(norm.extras.back(), RealMat::identity(3));
  EXPECT_TRUE(afr_check(seq_to_stacked(norm)).certified());
}
