// One PASS/FAIL line per acceptance criterion. With arguments, runs only the
// listed criterion numbers. Exit status 1 if any criterion that ran failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "rankscope/io.hpp"
#include "rankscope/rankscope.hpp"

using namespace rankscope;
using namespace rankscope::basis;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// n = (2a+1) 2^(b+4c), rho = 8c + 2^b.
std::size_t rho_formula(std::size_t n) {
  std::size_t e = 0;
  while (n % 2 == 0) n /= 2, ++e;
  return 8 * (e / 4) + (std::size_t{1} << (e % 4));
}

Outcome rho_table() {
  for (std::size_t n = 1; n <= 64; ++n)
    if (rho(n) != rho_formula(n)) return {false, fmt("rho(%zu) = %zu", n, rho(n))};
  const std::pair<std::size_t, std::size_t> spot[] = {{2, 2}, {4, 4}, {8, 8}, {16, 9}, {32, 10}, {64, 12}};
  for (auto [n, want] : spot)
    if (rho(n) != want) return {false, fmt("rho(%zu) = %zu, want %zu", n, rho(n), want)};
  return {true, "n = 1..64 and spot values"};
}

Outcome hr_exactness() {
  for (std::size_t order : {2u, 4u, 8u, 16u, 32u, 64u}) {
    const HRFamily f = hr_family(order);
    if (f.members.size() != rho(order) - 1) return {false, fmt("order %zu: %zu members", order, f.members.size())};
    if (!validate_hr(f)) return {false, fmt("order %zu fails validation", order)};
  }
  return {true, "orders 2..64"};
}

Outcome ans_identity() {
  Rng rng(2024);
  std::uniform_int_distribution<int> u(-1000, 1000);
  std::size_t checked = 0;
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    const IntTensor t = ans_tensor(n, rho(n));
    for (int trial = 0; trial < 100; ++trial) {
      IntMat sum(n, n);
      Integer norm2 = 0;
      for (const auto& a : t.slices()) {
        const Integer x = u(rng);
        sum += a * x;
        norm2 += x * x;
      }
      if (!(sum.transpose() * sum == IntMat::identity(n) * norm2)) return {false, fmt("n = %zu trial %d", n, trial)};
      ++checked;
    }
  }
  return {true, fmt("%zu vectors", checked)};
}

Outcome constructions() {
  const std::pair<MiscCase, std::size_t> cases[] = {
      {MiscCase::M3, 3}, {MiscCase::M3, 7}, {MiscCase::M4, 6}, {MiscCase::M6, 12}, {MiscCase::M10, 24}};
  std::string notes;
  for (auto [c, n] : cases) {
    const auto inf = info(c);
    const IntTensor t = build_misc(c, n);
    const auto rep = sp_afr_report(t, inf.l);
    const std::string tag = std::string(inf.name) + fmt(" n=%zu", n);
    if (!rep.ok) return {false, tag + " fails the zero-bottom AFR check"};
    if (!bottom_rows_zero(t, inf.l)) return {false, tag + " bottom rows not zero"};
    if (!exact_certify(build_misc_parent(c, n))) return {false, tag + " parent not exactly certified"};
    notes += tag + (rep.heuristic ? " (unfalsified) " : " (certified) ");
  }
  return {true, notes};
}

Outcome canonicalization() {
  std::string notes;
  bool ok = true;
  for (auto [s, t] : {std::pair{2, 3}, {3, 5}, {3, 7}}) {
    int good = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      Rng rng(derive_seed(5, i));
      try {
        good += pencil_canonicalize(gaussian_tensor(rng, s, t, 2)).residual <= 1e-8;
      } catch (const Error&) {
      }
    }
    ok = ok && good >= 198;
    notes += fmt("pencil %dx%dx2 %d/200; ", s, t, good);
  }
  // Detector shapes (n,p,m) = (3,5,3) and (2,5,4): the first m-1 slices.
  for (auto [s, t, u] : {std::tuple{3, 5, 2}, {2, 5, 3}}) {
    int good = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      Rng rng(derive_seed(6, i));
      try {
        good += multi_canonicalize(gaussian_tensor(rng, s, t, u)).residual <= 1e-8;
      } catch (const Error&) {
      }
    }
    ok = ok && good >= 190;
    notes += fmt("multi %dx%dx%d %d/200; ", s, t, u, good);
  }
  auto identity_dev = [](const RealMat& m) { return max_abs(m - RealMat::identity(m.rows())); };
  for (auto [s, t, u] : {std::tuple{2, 3, 2}, {3, 5, 2}, {3, 7, 2}, {2, 5, 3}}) {
    const RealTensor pat = staircase_pattern(s, t, u);
    const CanonResult r = u == 2 ? pencil_canonicalize(pat) : multi_canonicalize(pat);
    const bool fixed = identity_dev(r.pmat) <= 1e-12 && identity_dev(r.qmat) <= 1e-12 && r.residual <= 1e-12;
    ok = ok && fixed;
    if (!fixed) notes += fmt("pattern %dx%dx%d not fixed; ", s, t, u);
  }
  return {ok, notes + "fixed points checked"};
}

Outcome example_rank3() {
  const RealTensor t({RealMat::identity(2), to_real(rot())});
  const auto r = rank_nn2(t);
  const CpFit two = rank_leq_oracle(t, 2, {.restarts = 20});
  const CpFit three = rank_leq_oracle(t, 3, {.restarts = 20});
  const bool ok = r == 3u && !two.found && two.residual >= 0.1 && three.found && three.residual <= 1e-6;
  return {ok, fmt("rank_nn2 = %d, r=2 best %.3g, r=3 %.3g", r ? static_cast<int>(*r) : -1, two.residual,
                  three.residual)};
}

Outcome witness() {
  const RealTensor y = assemble_witness(sp_afr_to_seq(build_misc(MiscCase::M3, 3), 1));
  const DetectorVerdict v = detector(y);
  return {v.status == DetectorStatus::HigherRank && v.certified,
          fmt("%s, certified %d, margin %.3g", std::string(to_string(v.status)).c_str(), v.certified ? 1 : 0,
              v.transcript.margin)};
}

McSummary run_mc(std::size_t m, std::size_t n, std::size_t p, std::size_t samples, std::uint64_t seed, bool cross) {
  McOptions o{.samples = samples, .seed = seed, .crosscheck = cross, .workers = default_workers()};
  o.detector = mc_detector_defaults();
  return mc_experiment(m, n, p, o);
}

Outcome plural_ranks() {
  const McSummary s = run_mc(3, 3, 5, 1000, 42, true);
  return {s.fraction_higher >= 0.05 && s.fraction_fit_p >= 0.05,
          fmt("fraction_higher %.3f (%zu certified), fraction_fit_p %.3f", s.fraction_higher, s.certified_higher,
              s.fraction_fit_p)};
}

Outcome ans_family() {
  const McSummary s = run_mc(3, 4, 8, 500, 7, false);
  return {s.fraction_higher >= 0.05, fmt("fraction_higher %.3f", s.fraction_higher)};
}

Outcome invariants() {
  std::string notes;
  bool ok = true;

  // Transform preservation on certified tensors.
  std::vector<RealTensor> corpus;
  Rng rng(10);
  for (std::uint64_t i = 0; corpus.size() < 50 && i < 1000; ++i) {
    const std::size_t n = 2 + i % 2;
    RealTensor t = gaussian_tensor(rng, n + 1, n, 2 + i % 2);
    if (afr_check(t).certified()) corpus.push_back(std::move(t));
  }
  std::size_t falsified = 0, checks = 0;
  for (const auto& t : corpus) {
    for (TransformSpec spec : {TransformSpec{TransformKind::Rotate, 0}, TransformSpec{TransformKind::PadRows, 1},
                               TransformSpec{TransformKind::CutCols, 1}, TransformSpec{TransformKind::KronLift, 2}}) {
      falsified += afr_check(transform(t, spec)).falsified();
      ++checks;
    }
  }
  ok = ok && corpus.size() == 50 && falsified == 0;
  notes += fmt("transforms %zu/%zu unfalsified on %zu tensors; ", checks - falsified, checks, corpus.size());

  // Perturbations of norm below half the certified margin.
  const RealTensor base = to_real(ans_tensor(4, 3));
  const AfrVerdict v = grid_certify(base, {.mesh = 0.02});
  std::size_t survived = 0;
  for (int trial = 0; v.certified() && trial < 20; ++trial) {
    std::vector<EMat> s = eigen_slices(base);
    for (auto& a : s) {
      const EMat d = gaussian_matrix(rng, a.rows(), a.cols());
      a += d * (0.5 * v.margin / (std::sqrt(3.0) * spectral_norm(d)));
    }
    survived += !falsify(from_eigen_slices(s)).has_value();
  }
  ok = ok && survived == 20;
  notes += fmt("openness %zu/20; ", survived);

  // Flattening lower bounds.
  std::size_t lb = 0;
  for (int k = 0; k < 100; ++k) {
    const RealTensor t = k % 2 ? to_real(random_int_tensor(rng, 2, 2, 2, -3, 3)) : gaussian_tensor(rng, 2, 3, 2);
    lb += lower_bound_check(t, {.restarts = 10, .seed = static_cast<std::uint64_t>(k)});
  }
  ok = ok && lb == 100;
  notes += fmt("lower bounds %zu/100; ", lb);

  // Worker-count independence.
  McOptions o{.samples = 40, .seed = 42, .crosscheck = true, .workers = 1};
  o.detector = mc_detector_defaults();
  const std::string one = summary_to_json(mc_experiment(3, 3, 5, o), false).dump();
  o.workers = 4;
  const std::string four = summary_to_json(mc_experiment(3, 3, 5, o), false).dump();
  ok = ok && one == four;
  notes += one == four ? "MC 1 vs 4 workers identical" : "MC differs across worker counts";
  return {ok, notes};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "rho table", 1, rho_table},
      {2, "Hurwitz-Radon exactness", 5, hr_exactness},
      {3, "ANS identity", 10, ans_identity},
      {4, "constructions", 30, constructions},
      {5, "canonicalization", 120, canonicalization},
      {6, "rank of (E_2; A)", 10, example_rank3},
      {7, "witness detection", 30, witness},
      {8, "plural typical ranks 3x5x3", 600, plural_ranks},
      {9, "ANS family 4x8x3", 600, ans_family},
      {10, "invariant suites", 300, invariants},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_s;
    failed += !pass;
    std::printf("criterion %2d %s: %s (%.1f s, limit %.0f s) %s\n", c.id, pass ? "PASS" : "FAIL", c.name, secs,
                c.limit_s, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
