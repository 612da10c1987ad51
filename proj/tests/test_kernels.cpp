#include "doctest.h"

#include <omp.h>

#include <random>

#include "ddsim/kernels.hpp"
#include "test_support.hpp"

using namespace ddsim;

namespace {

struct ThreadCount {
  explicit ThreadCount(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 7u, 256u, 257u, 1000u, 3001u}) {
    const auto t = testing::random_table(n + 1, 5, rng);
    const auto params = testing::random_vector(6, rng);
    const auto coef = testing::random_vector(t.size(), rng);

    std::vector<double> par(t.size()), ser(t.size());
    kernels::affine_scores(t.features, params, par);
    kernels::serial::affine_scores(t.features, params, ser);
    CHECK(par == ser);

    std::vector<double> ps(6), ss(6);
    kernels::weighted_row_sum(t.features, coef, ps);
    kernels::serial::weighted_row_sum(t.features, coef, ss);
    CHECK(testing::relative_error(ps, ss) < 1e-12);
    if (t.size() <= kernels::kBlockRows) CHECK(ps == ss);

    const double pb = kernels::blocked_sum(coef);
    const double sb = kernels::serial::blocked_sum(coef);
    CHECK(pb == doctest::Approx(sb).epsilon(1e-12));
  }
}

TEST_CASE("reductions are bitwise identical across thread counts") {
  std::mt19937_64 rng(12);
  const auto t = testing::random_table(5000, 8, rng);
  const auto coef = testing::random_vector(t.size(), rng);

  std::vector<double> reference(9);
  double reference_sum = 0.0;
  {
    ThreadCount one(1);
    kernels::weighted_row_sum(t.features, coef, reference);
    reference_sum = kernels::blocked_sum(coef);
  }
  for (int threads : {2, 3, 4, 7}) {
    ThreadCount scoped(threads);
    std::vector<double> out(9);
    kernels::weighted_row_sum(t.features, coef, out);
    CHECK(out == reference);
    CHECK(kernels::blocked_sum(coef) == reference_sum);
  }
}
