#include "mucs/prior.hpp"

#include <boost/random/normal_distribution.hpp>

#include "mucs/rng.hpp"

namespace mucs {

Vector sample_signal(const SignalPrior& prior, Index n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_signal: n must be at least 1");
  auto engine = rng::make_engine(seed, rng::Stream::Signal);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  Vector s(n);
  // One uniform decides support, then one normal for each nonzero entry.
  for (Index i = 0; i < n; ++i) {
    const bool nonzero = rng::uniform01(engine) < prior.rho();
    s[i] = nonzero ? normal(engine) : 0.0;
  }
  return s;
}

}  // namespace mucs
