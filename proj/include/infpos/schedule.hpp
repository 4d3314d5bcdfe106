#pragma once

namespace infpos {

// Cyclic learning-rate schedule: exponential decay to a floor, staircase ramp
// back up to a cap, then the decay resumes from the cap.
struct LrSchedule {
  double initial = 2e-3;
  double decay = 0.78;       // multiplicative, applied every decay_every epochs
  int decay_every = 2;
  double floor = 9e-6;
  int ramp_period = 20;      // epochs between ramp steps while on the floor
  double ramp_step = 3.1622776601683795;  // x sqrt(10) per ramp step
  double ramp_cap = 1e-4;
  int total_epochs = 300;

  void validate() const;
};

// Pure function of the epoch index. Decay phase: lr = base * decay^floor(t/2)
// clamped at the floor; once the undamped value first falls below the floor,
// the lr holds there and is multiplied by ramp_step every ramp_period epochs
// until it reaches ramp_cap, where the decay law restarts with base=ramp_cap.
double lr_at_epoch(int epoch, const LrSchedule& s);

}  // namespace infpos
