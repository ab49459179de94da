#pragma once

namespace etup {

// Process-wide cap on worker threads used by fit/predict loops.
// n <= 0 restores the hardware default. Results are identical for any
// setting; this only bounds resource usage.
void set_max_threads(int n);
int max_threads();

}  // namespace etup
