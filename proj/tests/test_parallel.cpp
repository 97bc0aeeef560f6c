#include "layerpot/measures.hpp"
#include "layerpot/operators.hpp"
#include "layerpot/parallel.hpp"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

using namespace layerpot;

namespace {

struct EnvGuard {
  explicit EnvGuard(const char* v) {
    if (const char* old = std::getenv("LAYERPOT_THREADS")) saved = old, had = true;
    ::setenv("LAYERPOT_THREADS", v, 1);
  }
  ~EnvGuard() {
    if (had)
      ::setenv("LAYERPOT_THREADS", saved.c_str(), 1);
    else
      ::unsetenv("LAYERPOT_THREADS");
  }
  std::string saved;
  bool had = false;
};

}  // namespace

TEST_CASE("LAYERPOT_THREADS caps the worker count") {
  {
    EnvGuard g("1");
    CHECK(thread_count() == 1);
  }
  {
    EnvGuard g("100000");
    CHECK(thread_count() >= 1);
    CHECK(thread_count() <= std::max(1u, std::thread::hardware_concurrency()));
  }
  {
    EnvGuard g("garbage");
    CHECK(thread_count() >= 1);
  }
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  parallel_for(0, [](std::size_t) { FAIL("no iterations expected"); });
}

TEST_CASE("parallel_for rethrows worker exceptions") {
  CHECK_THROWS_AS(parallel_for(64, [](std::size_t i) {
                    if (i == 17) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("pairwise sum against a long double oracle") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t n : {0u, 1u, 2u, 7u, 1000u, 100000u}) {
    std::vector<double> v(n);
    long double ref = 0;
    for (auto& x : v) {
      x = u(g);
      ref += x;
    }
    CHECK(std::abs(pairwise_sum(v) - static_cast<double>(ref)) <= 1e-14 * (1.0 + std::sqrt(double(n))));
  }
}

TEST_CASE("operator norms do not depend on the thread cap") {
  const auto mu = measures::generate(measures::LipschitzGraph{0.1, 6.0, 12}, 2);
  double a, b;
  {
    EnvGuard g("1");
    a = ops::opnorm(kernels::KernelSpec::riesz(), mu, 0.01).sigma_max;
  }
  {
    EnvGuard g("64");
    b = ops::opnorm(kernels::KernelSpec::riesz(), mu, 0.01).sigma_max;
  }
  CHECK(a == b);
}
