#pragma once

namespace npiv {

// Selects between the OpenMP kernels and their serial reference loops.
// Both paths produce bit-identical results.
enum class Execution { serial, parallel };

inline bool is_parallel(Execution exec) { return exec == Execution::parallel; }

}  // namespace npiv
