#pragma once

namespace rain {

// Global worker-count knob for the OpenMP kernels. Every parallel kernel in
// the library has a serial reference path (jobs == 1) and must produce
// bit-identical results for any job count.
void set_jobs(int jobs);
int jobs();

// True when compiled with OpenMP and jobs() > 1.
bool parallel_enabled();

}  // namespace rain
