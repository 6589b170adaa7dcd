#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "ultratree/bhv_metric.hpp"
#include "ultratree/sampling.hpp"
#include "ultratree/t_metric.hpp"
#include "ultratree/tau_metric.hpp"

namespace ultratree {

struct MeanResult {
  TauTree mean;
  double variance = 0.0;
  std::size_t iterations = 0;
  double final_step = 0.0;
};

struct MeanOptions {
  std::size_t iterations = 10'000;
  bool random_order = false;  // cyclic order otherwise
  std::uint64_t seed = 0;
  /// Called with every iterate, starting with the initial one.
  std::function<void(const TauTree&)> observer;
};

namespace detail {

inline void require_common_taxa(const std::vector<TauTree>& trees) {
  if (trees.empty()) throw Error(ErrorKind::EmptyInput, "need at least one tree");
  for (const auto& t : trees) require_same_taxa(trees.front().taxa_ptr(), t.taxa_ptr());
}

}  // namespace detail

/// Mean squared tau-distance from `mean` to the sample.
inline double frechet_variance(const std::vector<TauTree>& trees, const TauTree& mean) {
  detail::require_common_taxa(trees);
  require_same_taxa(trees.front().taxa_ptr(), mean.taxa_ptr());
  double s = 0.0;
  for (const auto& t : trees) {
    const double d = tau_distance(mean, t);
    s += d * d;
  }
  return s / static_cast<double>(trees.size());
}

/// Inductive mean: x_0 = first sample, then x_k moves a fraction 1/(k+1)
/// along the geodesic towards the k-th sample. The iteration count includes
/// the initial sample, so a cyclic pass over N trees uses each equally often
/// whenever N divides it.
inline MeanResult frechet_mean(const std::vector<TauTree>& trees, const MeanOptions& opt = {}) {
  detail::require_common_taxa(trees);
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
  auto next = [&](std::size_t k) { return opt.random_order ? pick(rng) : k % trees.size(); };

  MeanResult res;
  TauTree x = trees[next(0)];
  if (opt.observer) opt.observer(x);
  const std::size_t total = std::max<std::size_t>(opt.iterations, 1);
  for (std::size_t k = 1; k < total; ++k) {
    const TauTree& y = trees[next(k)];
    const double step = 1.0 / static_cast<double>(k + 1);
    if (!same_point(x, y)) x = point_at(tau_geodesic(x, y), step);
    res.final_step = step;
    if (opt.observer) opt.observer(x);
  }
  res.iterations = total;
  res.variance = frechet_variance(trees, x);
  res.mean = std::move(x);
  return res;
}

inline double frechet_variance(const std::vector<TauTree>& trees, std::size_t iterations = 10'000) {
  MeanOptions opt;
  opt.iterations = iterations;
  return frechet_mean(trees, opt).variance;
}

struct MuEstimate {
  std::size_t n = 0;
  Space space = Space::tau;
  std::size_t samples = 0;
  double estimate = 0.0;
  double half_width = 0.0;  // 95% normal-approximation binomial interval
  std::size_t cone_pairs = 0;
  std::size_t skipped_same_topology = 0;
};

struct MuOptions {
  std::size_t samples = 10'000;
  std::uint64_t seed = 0;
  IntervalDist interval_dist = IntervalDist::exponential;
  std::size_t jobs = 0;  // 0 = hardware concurrency
  bool include_same_topology = false;
};

inline constexpr std::size_t kMaxTSpaceMuTaxa = 5;

/// Monte-Carlo estimate of the fraction of tree pairs joined by a cone path.
/// Pair i is drawn from its own stream derive_seed(seed, i), so the estimate
/// does not depend on the number of workers. By default pairs with the same
/// ranked topology are redrawn (from the same stream) rather than counted.
inline MuEstimate estimate_mu(std::size_t n, Space space, const MuOptions& opt = {}) {
  if (n < 3) throw Error(ErrorKind::UnsupportedN, "need at least three taxa");
  if (space == Space::t && n > kMaxTSpaceMuTaxa) {
    throw Error(ErrorKind::UnsupportedN, "t-space estimates use the brute-force geodesic and support n <= 5");
  }
  if (opt.samples == 0) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
  auto taxa = numbered_taxa(n);

  struct Outcome {
    bool cone = false;
    std::size_t redraws = 0;
  };
  auto classify = [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(opt.seed, i));
    Outcome out;
    for (;;) {
      TauTree a = sample_tree(taxa, rng, opt.interval_dist);
      TauTree b = sample_tree(taxa, rng, opt.interval_dist);
      if (!opt.include_same_topology && a.topology() == b.topology()) {
        ++out.redraws;
        continue;
      }
      switch (space) {
        case Space::tau: out.cone = is_cone_geodesic_tau(a, b); break;
        case Space::bhv: out.cone = is_cone_geodesic_bhv(a, b); break;
        case Space::t: out.cone = is_cone_geodesic_t(to_t(a), to_t(b)); break;
      }
      return out;
    }
  };

  std::size_t jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, opt.samples);
  std::vector<Outcome> outcomes(opt.samples);
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t i; (i = cursor.fetch_add(1)) < opt.samples;) outcomes[i] = classify(i);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      cursor = opt.samples;
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  MuEstimate est;
  est.n = n;
  est.space = space;
  est.samples = opt.samples;
  for (const auto& o : outcomes) {
    est.cone_pairs += o.cone;
    est.skipped_same_topology += o.redraws;
  }
  est.estimate = static_cast<double>(est.cone_pairs) / static_cast<double>(est.samples);
  est.half_width = 1.96 * std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(est.samples));
  return est;
}

}  // namespace ultratree
