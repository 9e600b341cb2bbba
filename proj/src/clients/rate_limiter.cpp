#include "ebi/clients/rate_limiter.hpp"

#include <algorithm>
#include <thread>

namespace ebi::clients {

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_sec_(requests_per_minute / 60.0),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(Clock::now()) {}

RateLimiter::Clock::duration RateLimiter::try_acquire(Clock::time_point now) {
  if (rate_per_sec_ <= 0.0) return Clock::duration::zero();
  std::lock_guard lock(mu_);
  const double elapsed = std::chrono::duration<double>(now - last_).count();
  if (elapsed > 0) {
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_per_sec_);
    last_ = now;
  }
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return Clock::duration::zero();
  }
  const double wait = (1.0 - tokens_) / rate_per_sec_;
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(wait));
}

void RateLimiter::acquire() {
  for (;;) {
    const auto wait = try_acquire(Clock::now());
    if (wait == Clock::duration::zero()) return;
    std::this_thread::sleep_for(wait);
  }
}

}  // namespace ebi::clients
