#pragma once

namespace relguide {

/// Selects between the OpenMP kernel and its serial reference. Both produce
/// identical results; the serial path exists for testing and benchmarking.
enum class Exec { kSerial, kParallel };

int worker_count(Exec exec);

}  // namespace relguide
