#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "lada/error.hpp"
#include "lada/neighbors.hpp"

using namespace lada;
using testing::mat;

namespace {

struct Ref {
  Id id;
  double sim;
};

// Full pairwise sort, computed without the library's kernels.
std::vector<std::vector<Ref>> exhaustive(const Matrix& x, std::span<const Id> ids, std::size_t k) {
  std::vector<std::vector<Ref>> out;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<Ref> all;
    for (std::size_t j = 0; j < x.rows(); ++j) {
      if (j == i) continue;
      double d = 0.0, ni = 0.0, nj = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        d += x(i, c) * x(j, c);
        ni += x(i, c) * x(i, c);
        nj += x(j, c) * x(j, c);
      }
      all.push_back({ids[j], d / std::sqrt(ni * nj)});
    }
    std::sort(all.begin(), all.end(), [](const Ref& a, const Ref& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      return a.id < b.id;
    });
    all.resize(k);
    out.push_back(all);
  }
  return out;
}

}  // namespace

TEST_SUITE("neighbors") {
  TEST_CASE("a duplicate is the top neighbor") {
    const Matrix x = mat({{1.0, 2.0}, {0.0, 1.0}, {2.0, 4.0}, {-1.0, 0.3}});
    const std::vector<Id> ids{0, 1, 2, 3};
    const auto index = build_index(x, ids, 2);
    CHECK(index.row(0)[0].id == 2);
    CHECK(index.row(0)[0].similarity == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(index.row(2)[0].id == 0);
  }

  TEST_CASE("orthogonal vectors tie to the lowest id") {
    const Matrix x = mat({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
    const std::vector<Id> ids{10, 11, 12};
    const auto index = build_index(x, ids, 1);
    CHECK(index.row(0)[0].id == 11);
    CHECK(index.row(1)[0].id == 10);
    CHECK(index.row(2)[0].id == 10);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(index.row(i)[0].similarity == 0.0);
      CHECK(index.row(i)[0].weight == 1.0);
    }
  }

  TEST_CASE("matches the exhaustive sort oracle") {
    Rng rng(77);
    for (std::size_t n : {6u, 30u, 200u}) {
      for (std::size_t k : {1u, 3u, 5u}) {
        const Matrix x = testing::random_matrix(n, 4, rng);
        std::vector<Id> ids = testing::iota_ids(n, 5);
        std::reverse(ids.begin(), ids.end());
        const auto index = build_index(x, ids, k);
        const auto ref = exhaustive(x, ids, k);
        for (std::size_t i = 0; i < n; ++i) {
          const auto row = index.row(i);
          REQUIRE(row.size() == k);
          for (std::size_t j = 0; j < k; ++j) {
            CHECK(row[j].id == ref[i][j].id);
            CHECK(row[j].similarity == doctest::Approx(ref[i][j].sim).epsilon(1e-12));
            CHECK(ids[row[j].position] == row[j].id);
          }
        }
      }
    }
  }

  TEST_CASE("ties in similarity break by ascending id") {
    // rows 1..3 are identical, so from row 0 they tie
    const Matrix x = mat({{1.0, 0.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}});
    const std::vector<Id> ids{0, 9, 4, 7};
    const auto index = build_index(x, ids, 3);
    CHECK(index.row(0)[0].id == 4);
    CHECK(index.row(0)[1].id == 7);
    CHECK(index.row(0)[2].id == 9);
  }

  TEST_CASE("weights are clamped cosines normalized per row") {
    Rng rng(5);
    const Matrix x = testing::random_matrix(40, 3, rng);
    const auto ids = testing::iota_ids(40);
    const auto index = build_index(x, ids, 6);
    for (std::size_t i = 0; i < 40; ++i) {
      double total = 0.0, raw_total = 0.0;
      for (const auto& nb : index.row(i)) raw_total += std::max(nb.similarity, 0.0) + kNeighborWeightEpsilon;
      for (const auto& nb : index.row(i)) {
        CHECK(nb.weight >= 0.0);
        CHECK(nb.id != ids[i]);
        CHECK(nb.weight == doctest::Approx((std::max(nb.similarity, 0.0) + kNeighborWeightEpsilon) / raw_total));
        total += nb.weight;
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
      for (std::size_t j = 1; j < 6; ++j) CHECK(index.row(i)[j - 1].similarity >= index.row(i)[j].similarity);
    }
  }

  TEST_CASE("neighbors_of equals the built row") {
    Rng rng(6);
    const Matrix x = testing::random_matrix(15, 3, rng);
    const auto ids = testing::iota_ids(15, 100);
    const auto index = build_index(x, ids, 4);
    for (std::size_t i = 0; i < 15; ++i) {
      const auto q = neighbors_of(index, ids[i]);
      REQUIRE(q.size() == 4);
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(q[j].id == index.row(i)[j].id);
        CHECK(q[j].weight == index.row(i)[j].weight);
      }
    }
    CHECK_THROWS_AS(neighbors_of(index, 5), DataError);
  }

  TEST_CASE("permuting the input permutes the output") {
    Rng rng(8);
    const Matrix x = testing::random_matrix(25, 4, rng);
    const auto ids = testing::iota_ids(25);
    std::vector<std::size_t> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 24; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    std::vector<Id> pids;
    for (auto p : perm) pids.push_back(ids[p]);
    const auto a = build_index(x, ids, 5);
    const auto b = build_index(gather_rows(x, perm), pids, 5);
    for (Id id : ids) {
      const auto ra = neighbors_of(a, id);
      const auto rb = neighbors_of(b, id);
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(ra[j].id == rb[j].id);
        CHECK(ra[j].weight == rb[j].weight);
      }
    }
  }

  TEST_CASE("invalid builds") {
    const Matrix x = mat({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
    const std::vector<Id> ids{0, 1, 2};
    CHECK_THROWS(build_index(x, ids, 3));
    CHECK_THROWS(build_index(x, ids, 0));
    CHECK_THROWS(build_index(mat({{1.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}}), ids, 1));
    const std::vector<Id> dup{0, 0, 1};
    CHECK_THROWS(build_index(x, dup, 1));
  }
}

TEST_CASE("fill_zero_rows makes dead activations indexable" * doctest::test_suite("neighbors")) {
  Matrix e = testing::mat({{0.0, 0.0}, {1.0, 0.0}, {0.0, 2.0}, {0.0, 0.0}});
  const std::vector<Id> ids{0, 1, 2, 3};
  CHECK_THROWS_AS(build_index(e, ids, 1), DataError);
  CHECK(fill_zero_rows(e) == 2);
  CHECK(e(0, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(e(1, 0) == 1.0);
  CHECK(e(2, 1) == 2.0);
  const auto index = build_index(e, ids, 1);
  CHECK(neighbors_of(index, 0)[0].id == 3);
}
