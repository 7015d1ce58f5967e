#pragma once

#include <optional>

#include "relay_mtl/mtl/formula.hpp"

namespace relay_mtl::mtl {

/// Finite-trace semantics. Indices past the end of the trace are allowed:
/// atoms there are strongly false and weakly true.
bool eval_strong(const Trace& trace, const Formula& f, int j = 0);
bool eval_weak(const Trace& trace, const Formula& f, int j = 0);
Verdict evaluate(const Trace& trace, const Formula& f, int j = 0);

/// Number of samples past `j` needed to decide `f`; nullopt when some interval is unbounded.
std::optional<int> necessary_length(const Formula& f);

}  // namespace relay_mtl::mtl
