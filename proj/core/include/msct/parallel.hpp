#pragma once

namespace msct {

/// Sets the worker count used by the parallel loops in the library (<= 0 restores the default).
/// Results never depend on this value.
void set_thread_count(int threads);
int thread_count();

} // namespace msct
