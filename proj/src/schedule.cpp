#include "infpos/schedule.hpp"

#include <cmath>

#include "infpos/error.hpp"

namespace infpos {

void LrSchedule::validate() const {
  if (!(initial > 0.0 && floor > 0.0 && ramp_cap > 0.0))
    throw Error(Errc::config, "schedule: rates must be positive");
  if (!(floor < ramp_cap && ramp_cap < initial))
    throw Error(Errc::config, "schedule: require floor < ramp_cap < initial");
  if (!(decay > 0.0 && decay < 1.0))
    throw Error(Errc::config, "schedule.decay: must lie in (0,1)");
  if (decay_every < 1 || ramp_period < 1 || total_epochs < 1)
    throw Error(Errc::config, "schedule: periods and total_epochs must be >= 1");
  if (!(ramp_step > 1.0)) throw Error(Errc::config, "schedule.ramp_step: must be > 1");
}

double lr_at_epoch(int epoch, const LrSchedule& s) {
  s.validate();
  if (epoch < 0 || epoch >= s.total_epochs)
    throw Error(Errc::domain, "lr_at_epoch: epoch out of range");

  enum class Phase { decay, ramp };
  Phase phase = Phase::decay;
  double base = s.initial;
  int phase_start = 0;  // epoch at which the current phase began
  double lr = s.initial;

  for (int t = 0; t <= epoch; ++t) {
    if (phase == Phase::decay) {
      const double raw = base * std::pow(s.decay, (t - phase_start) / s.decay_every);
      if (raw < s.floor) {
        lr = s.floor;
        phase = Phase::ramp;
        phase_start = t;  // ramp steps land at phase_start + k*ramp_period, k >= 1
      } else {
        lr = raw;
      }
    } else {
      const int dt = t - phase_start;
      if (dt > 0 && dt % s.ramp_period == 0) {
        lr = std::min(lr * s.ramp_step, s.ramp_cap);
        if (lr >= s.ramp_cap) {
          phase = Phase::decay;
          base = s.ramp_cap;
          phase_start = t;
        }
      }
    }
  }
  return lr;
}

}  // namespace infpos
