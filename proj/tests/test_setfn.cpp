#include <doctest.h>

#include <cmath>
#include <set>

#include "rain/rng.hpp"
#include "rain/setfn.hpp"

using namespace rain;
using setfn::SetObjective;
using setfn::SubsetMask;

namespace {

SetObjective modular(std::vector<double> weights) {
  const int n = static_cast<int>(weights.size());
  return SetObjective(n, [w = std::move(weights)](SubsetMask m) {
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
      if ((m >> i) & 1ull) s += w[i];
    }
    return s;
  });
}

SetObjective sqrt_cardinality(int n) {
  return SetObjective(n, [](SubsetMask m) { return std::sqrt(setfn::mask_size(m)); });
}

// Random monotone submodular coverage function.
SetObjective random_coverage(Rng& rng, int n, int elements) {
  std::vector<uint32_t> cover(n);
  std::vector<double> weights(elements);
  for (auto& w : weights) w = rng.uniform(0.1, 1.0);
  for (auto& c : cover) {
    for (int e = 0; e < elements; ++e) {
      if (rng.uniform() < 0.5) c |= 1u << e;
    }
    if (!c) c = 1u << rng.uniform_int(elements);
  }
  return SetObjective(n, [cover, weights, elements](SubsetMask m) {
    double total = 0.0;
    for (int e = 0; e < elements; ++e) {
      for (size_t i = 0; i < cover.size(); ++i) {
        if (((m >> i) & 1ull) && ((cover[i] >> e) & 1u)) {
          total += weights[e];
          break;
        }
      }
    }
    return total;
  });
}

}  // namespace

TEST_CASE("curvature of a modular function is zero") {
  auto f = modular({2, 3, 5});
  CHECK(setfn::curvature(f) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("curvature of sqrt cardinality on four elements") {
  auto f = sqrt_cardinality(4);
  // Enumerating the definition directly: 1 - (2 - sqrt(3)) / 1.
  const double expected = 1.0 - (2.0 - std::sqrt(3.0));
  CHECK(setfn::curvature(f) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(setfn::curvature(f) == doctest::Approx(0.7321).epsilon(1e-4));
}

TEST_CASE("curvature of a saturating function is one") {
  SetObjective f(2, [](SubsetMask m) { return std::min(setfn::mask_size(m), 1); });
  CHECK(setfn::curvature(f) == doctest::Approx(1.0));
}

TEST_CASE("curvature rejects zero singletons") {
  SetObjective f(2, [](SubsetMask m) { return setfn::mask_contains(m, 1) ? 1.0 : 0.0; });
  CHECK_THROWS_AS(setfn::curvature(f), Error);
}

TEST_CASE("curvature rejects non-monotone functions") {
  SetObjective f(2, [](SubsetMask m) {
    return setfn::mask_size(m) == 2 ? 0.5 : static_cast<double>(setfn::mask_size(m));
  });
  try {
    setfn::curvature(f);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MonotoneViolation);
  }
}

TEST_CASE("total curvature of a modular function is zero") {
  auto f = modular({1, 4});
  CHECK(setfn::total_curvature(f) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("total curvature of sqrt cardinality on three elements") {
  auto f = sqrt_cardinality(3);
  const double expected = 1.0 - (std::sqrt(3.0) - std::sqrt(2.0));
  CHECK(setfn::total_curvature(f) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(setfn::total_curvature(f) == doctest::Approx(0.6822).epsilon(1e-4));
}

TEST_CASE("total curvature equals curvature for submodular functions") {
  Rng rng(7, "setfn");
  for (int i = 0; i < 20; ++i) {
    auto f = random_coverage(rng, 2 + rng.uniform_int(5), 3 + rng.uniform_int(6));
    const double kappa = setfn::curvature(f);
    const double c = setfn::total_curvature(f);
    CHECK(std::abs(kappa - c) <= 1e-9);
    CHECK(kappa >= 0.0);
    CHECK(kappa <= 1.0);
  }
}

TEST_CASE("total curvature guards the ground-set size") {
  auto f = sqrt_cardinality(13);
  CHECK_THROWS_AS(setfn::total_curvature(f), Error);
}

TEST_CASE("greedy attack on a modular function removes the largest weights") {
  auto f = modular({2, 3, 5});
  const auto attack = setfn::greedy_attack(f, 2);
  CHECK(attack.removed == std::vector<int>{1, 2});

  // Brute force over all 2-subsets agrees for modular objectives.
  const auto exact = setfn::exact_attack(f, 2);
  CHECK(f.value(f.ground_mask() & ~attack.removed_mask()) ==
        doctest::Approx(f.value(f.ground_mask() & ~exact.removed_mask())));
}

TEST_CASE("attacks with zero or full budget") {
  auto f = modular({2, 3, 5});
  CHECK(setfn::greedy_attack(f, 0).removed.empty());
  CHECK(setfn::exact_attack(f, 0).removed.empty());
  CHECK(setfn::greedy_attack(f, 3).removed == std::vector<int>{0, 1, 2});
}

TEST_CASE("exact attack single removal picks the largest modular weight") {
  auto f = modular({2, 3, 5});
  const auto attack = setfn::exact_attack(f, 1);
  CHECK(attack.removed == std::vector<int>{2});
  CHECK(f.value(f.ground_mask() & ~attack.removed_mask()) == doctest::Approx(5.0));
}

TEST_CASE("exact attack dominates greedy attack") {
  Rng rng(11, "setfn-attacks");
  for (int i = 0; i < 30; ++i) {
    auto f = random_coverage(rng, 3 + rng.uniform_int(4), 4 + rng.uniform_int(5));
    const int alpha = 1 + rng.uniform_int(2);
    const auto g = setfn::greedy_attack(f, alpha);
    const auto x = setfn::exact_attack(f, alpha);
    const double vg = f.value(f.ground_mask() & ~g.removed_mask());
    const double vx = f.value(f.ground_mask() & ~x.removed_mask());
    CHECK(vx <= vg + 1e-12);
  }
}

TEST_CASE("robust value oracle basics") {
  // One robot, two plans valued 1 and 2, no attacks.
  const double v1 = setfn::robust_value_oracle(
      {2}, [](std::span<const int> choice, SubsetMask m) {
        if (!setfn::mask_contains(m, 0)) return 0.0;
        return choice[0] == 0 ? 1.0 : 2.0;
      }, 0);
  CHECK(v1 == doctest::Approx(2.0));

  // Full removal budget hits the normalized floor.
  const double v0 = setfn::robust_value_oracle(
      {2, 2}, [](std::span<const int>, SubsetMask m) {
        return static_cast<double>(setfn::mask_size(m));
      }, 2);
  CHECK(v0 == doctest::Approx(0.0));
}

TEST_CASE("robust value oracle matches exhaustive reasoning on a modular instance") {
  // Two robots, two plans each: robot 0 earns {1.0, 3.0}, robot 1 {2.0, 2.5}.
  // With one removal the adversary deletes the larger contribution, so the
  // best assignment maximizes the smaller one.
  const std::vector<std::vector<double>> payoff = {{1.0, 3.0}, {2.0, 2.5}};
  const double v = setfn::robust_value_oracle(
      {2, 2}, [&](std::span<const int> choice, SubsetMask m) {
        double s = 0.0;
        for (int i = 0; i < 2; ++i) {
          if (setfn::mask_contains(m, i)) s += payoff[i][choice[i]];
        }
        return s;
      }, 1);
  // Independent enumeration: min(a, b) maximized at (3.0, 2.5) -> 2.5.
  CHECK(v == doctest::Approx(2.5));
}

TEST_CASE("robust value oracle guards the search space") {
  std::vector<int> counts(10, 10);  // 10^10 assignments
  CHECK_THROWS_AS(setfn::robust_value_oracle(
                      counts, [](std::span<const int>, SubsetMask) { return 0.0; }, 1),
                  Error);
}

TEST_CASE("property: objectives are normalized, monotone, with bounded curvature") {
  Rng rng(23, "setfn-props");
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 3 + rng.uniform_int(4);
    auto f = random_coverage(rng, n, 4 + rng.uniform_int(5));
    CHECK(std::abs(f.value(SubsetMask{0})) <= 1e-12);
    for (int pair = 0; pair < 200; ++pair) {
      SubsetMask b = rng.next_u64() & f.ground_mask();
      SubsetMask a = rng.next_u64() & b;
      CHECK(f.value(b) >= f.value(a) - 1e-9);
    }
    const double kappa = setfn::curvature(f);
    const double c = setfn::total_curvature(f);
    CHECK(kappa >= 0.0);
    CHECK(kappa <= 1.0);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("subset enumeration is lexicographic and complete") {
  std::vector<SubsetMask> seen;
  setfn::for_each_subset_upto(3, 2, [&](SubsetMask m) { seen.push_back(m); });
  // {}, {0}, {0,1}, {0,2}, {1}, {1,2}, {2}
  CHECK(seen == std::vector<SubsetMask>{0b000, 0b001, 0b011, 0b101, 0b010, 0b110, 0b100});
}

TEST_CASE("memoized evaluation calls the raw function once per subset") {
  int calls = 0;
  SetObjective f(4, [&calls](SubsetMask m) {
    ++calls;
    return static_cast<double>(setfn::mask_size(m));
  });
  f.value(SubsetMask{0b1010});
  f.value(SubsetMask{0b1010});
  f.value(std::vector<int>{1, 3});
  CHECK(calls == 1);
}
