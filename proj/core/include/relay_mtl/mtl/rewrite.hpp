#pragma once

#include <vector>

#include "relay_mtl/mtl/formula.hpp"

namespace relay_mtl::mtl {

/// Constant-folding constructors: drop neutral elements, short-circuit on absorbing
/// ones, flatten nested nodes of the same kind and remove structural duplicates.
Formula fold_and(std::vector<Formula> parts);
Formula fold_or(std::vector<Formula> parts);
Formula fold_not(const Formula& f);
Formula fold_at(int index, const Formula& f);

class SpecializeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Freezes every atom instance evaluated at an index <= `last` to the constant its
/// observed value gives, unrolling temporal operators over the observed prefix.
/// The unobserved remainder is anchored at index `last + 1` with `At` nodes, so the
/// result is meant to be evaluated at index 0. `last < 0` returns `f` unchanged.
/// Throws SpecializeError when `observed` has fewer than `last + 1` samples.
Formula specialize(const Formula& f, const Trace& observed, int last);

/// Negation normal form: `Not` only directly above atoms. Until is negated as
///   !(a U[lo,hi] b) = G[lo,hi] !b | F[0,lo-1] !a | F[lo,lo] (!b U[0,hi-lo-1] (!a & !b))
/// (middle term only when lo >= 1, last term only when hi > lo).
Formula to_nnf(const Formula& f);

/// Whether `f` is in negation normal form.
bool is_nnf(const Formula& f);

}  // namespace relay_mtl::mtl
