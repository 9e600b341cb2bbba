#pragma once

#include <chrono>
#include <mutex>

namespace ebi::clients {

// Token bucket: `burst` tokens, refilled at requests_per_minute / 60 per
// second. A non-positive rate disables limiting.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double requests_per_minute, double burst = 1.0);

  // Blocks until a token is available.
  void acquire();
  // Time the caller would have to wait right now; takes the token when zero.
  Clock::duration try_acquire(Clock::time_point now);

 private:
  double rate_per_sec_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
};

}  // namespace ebi::clients
