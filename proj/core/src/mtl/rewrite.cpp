#include "relay_mtl/mtl/rewrite.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace relay_mtl::mtl {
namespace {

using K = Formula::Kind;

Formula fold_nary(std::vector<Formula> parts, bool conj) {
  const K self = conj ? K::And : K::Or;
  std::vector<Formula> flat;
  std::vector<Formula> stack(parts.rbegin(), parts.rend());
  while (!stack.empty()) {
    Formula f = std::move(stack.back());
    stack.pop_back();
    if (f.kind() == self) {
      for (auto it = f.children().rbegin(); it != f.children().rend(); ++it) stack.push_back(*it);
      continue;
    }
    if (conj ? f.is_true() : f.is_false()) continue;
    if (conj ? f.is_false() : f.is_true()) return f;
    bool dup = false;
    for (const auto& g : flat) {
      if (structurally_equal(f, g)) {
        dup = true;
        break;
      }
    }
    if (!dup) flat.push_back(std::move(f));
  }
  return conj ? Formula::conjunction(std::move(flat)) : Formula::disjunction(std::move(flat));
}

class Specializer {
 public:
  Specializer(const Trace& observed, int last) : obs_(observed), last_(last) {}

  Formula at(const Formula& f, int j) {
    switch (f.kind()) {
      case K::True:
      case K::False:
        return f;
      case K::At:
        return at(f.child(), f.index());
      default:
        break;
    }
    if (j > last_) return fold_at(j, future(f));
    switch (f.kind()) {
      case K::Atom:
        return f.predicate().holds(obs_, j) ? Formula::truth() : Formula::falsity();
      case K::Not:
        return fold_not(at(f.child(), j));
      case K::And:
      case K::Or: {
        std::vector<Formula> parts;
        for (const auto& c : f.children()) parts.push_back(at(c, j));
        return f.kind() == K::And ? fold_and(std::move(parts)) : fold_or(std::move(parts));
      }
      case K::Eventually:
      case K::Always: {
        const bool ev = f.kind() == K::Eventually;
        const auto& iv = f.interval();
        const long first = static_cast<long>(j) + iv.lo;
        const long end = iv.hi ? static_cast<long>(j) + *iv.hi : -1;
        std::vector<Formula> parts;
        for (long k = first; k <= last_ && (end < 0 || k <= end); ++k) {
          parts.push_back(at(f.child(), static_cast<int>(k)));
        }
        if (end < 0 || end > last_) {
          const int lo = static_cast<int>(std::max<long>(0, first - last_ - 1));
          std::optional<int> hi;
          if (end >= 0) hi = static_cast<int>(end - last_ - 1);
          const Formula rest = ev ? Formula::eventually(TimeInterval(lo, hi), future(f.child()))
                                  : Formula::always(TimeInterval(lo, hi), future(f.child()));
          parts.push_back(fold_at(last_ + 1, rest));
        }
        return ev ? fold_or(std::move(parts)) : fold_and(std::move(parts));
      }
      case K::Until: {
        const auto& iv = f.interval();
        const long first = static_cast<long>(j) + iv.lo;
        const long end = iv.hi ? static_cast<long>(j) + *iv.hi : -1;
        std::vector<Formula> options;
        std::vector<Formula> prefix;  // lhs over [j, k)
        for (long k = j; k < first && k <= last_; ++k) prefix.push_back(at(f.child(0), static_cast<int>(k)));
        for (long k = first; k <= last_ && (end < 0 || k <= end); ++k) {
          std::vector<Formula> opt = prefix;
          opt.push_back(at(f.child(1), static_cast<int>(k)));
          options.push_back(fold_and(std::move(opt)));
          prefix.push_back(at(f.child(0), static_cast<int>(k)));
        }
        if (end < 0 || end > last_) {
          const int lo = static_cast<int>(std::max<long>(0, first - last_ - 1));
          std::optional<int> hi;
          if (end >= 0) hi = static_cast<int>(end - last_ - 1);
          std::vector<Formula> opt = prefix;
          opt.push_back(fold_at(last_ + 1, Formula::until(TimeInterval(lo, hi), future(f.child(0)),
                                                          future(f.child(1)))));
          options.push_back(fold_and(std::move(opt)));
        }
        return fold_or(std::move(options));
      }
      default:
        break;
    }
    throw std::logic_error("unhandled formula kind");
  }

 private:
  // Subformula evaluated strictly after the observed prefix: only anchors that
  // point back into the prefix need rewriting.
  Formula future(const Formula& f) {
    auto it = memo_.find(f.id());
    if (it != memo_.end()) return it->second;
    Formula out = f;
    switch (f.kind()) {
      case K::True:
      case K::False:
      case K::Atom:
        break;
      case K::At:
        out = f.index() <= last_ ? at(f.child(), f.index()) : fold_at(f.index(), future(f.child()));
        break;
      default: {
        std::vector<Formula> kids;
        bool changed = false;
        for (const auto& c : f.children()) {
          kids.push_back(future(c));
          changed = changed || kids.back().id() != c.id();
        }
        if (!changed) break;
        switch (f.kind()) {
          case K::Not: out = fold_not(kids[0]); break;
          case K::And: out = fold_and(std::move(kids)); break;
          case K::Or: out = fold_or(std::move(kids)); break;
          case K::Until: out = Formula::until(f.interval(), kids[0], kids[1]); break;
          case K::Eventually: out = Formula::eventually(f.interval(), kids[0]); break;
          case K::Always: out = Formula::always(f.interval(), kids[0]); break;
          default: break;
        }
      }
    }
    memo_.emplace(f.id(), out);
    return out;
  }

  const Trace& obs_;
  int last_;
  std::map<const void*, Formula> memo_;
};

Formula nnf(const Formula& f, bool negate) {
  switch (f.kind()) {
    case K::True:
      return negate ? Formula::falsity() : f;
    case K::False:
      return negate ? Formula::truth() : f;
    case K::Atom:
      return negate ? Formula::negation(f) : f;
    case K::Not:
      return nnf(f.child(), !negate);
    case K::And:
    case K::Or: {
      std::vector<Formula> parts;
      for (const auto& c : f.children()) parts.push_back(nnf(c, negate));
      const bool conj = (f.kind() == K::And) != negate;
      return conj ? fold_and(std::move(parts)) : fold_or(std::move(parts));
    }
    case K::At:
      return fold_at(f.index(), nnf(f.child(), negate));
    case K::Eventually:
    case K::Always: {
      const bool ev = (f.kind() == K::Eventually) != negate;
      Formula body = nnf(f.child(), negate);
      return ev ? Formula::eventually(f.interval(), body) : Formula::always(f.interval(), body);
    }
    case K::Until: {
      const auto& iv = f.interval();
      if (!negate) return Formula::until(iv, nnf(f.child(0), false), nnf(f.child(1), false));
      const Formula na = nnf(f.child(0), true);
      const Formula nb = nnf(f.child(1), true);
      std::vector<Formula> cases{Formula::always(iv, nb)};
      if (iv.lo >= 1) cases.push_back(Formula::eventually(TimeInterval(0, iv.lo - 1), na));
      if (!iv.hi || *iv.hi > iv.lo) {
        std::optional<int> hi;
        if (iv.hi) hi = *iv.hi - iv.lo - 1;
        cases.push_back(Formula::eventually(
            TimeInterval(iv.lo, iv.lo),
            Formula::until(TimeInterval(0, hi), nb, fold_and({na, nb}))));
      }
      return fold_or(std::move(cases));
    }
  }
  throw std::logic_error("unhandled formula kind");
}

}  // namespace

Formula fold_and(std::vector<Formula> parts) { return fold_nary(std::move(parts), true); }

Formula fold_or(std::vector<Formula> parts) { return fold_nary(std::move(parts), false); }

Formula fold_not(const Formula& f) {
  if (f.is_true()) return Formula::falsity();
  if (f.is_false()) return Formula::truth();
  if (f.kind() == K::Not) return f.child();
  return Formula::negation(f);
}

Formula fold_at(int index, const Formula& f) {
  if (f.is_true() || f.is_false()) return f;
  if (f.kind() == K::At) return f;  // inner anchor wins
  return Formula::at(index, f);
}

Formula specialize(const Formula& f, const Trace& observed, int last) {
  if (last < 0) return f;
  if (observed.horizon() < last) {
    throw SpecializeError("observed prefix has " + std::to_string(observed.horizon() + 1) +
                          " samples, need " + std::to_string(last + 1));
  }
  return Specializer(observed, last).at(f, 0);
}

Formula to_nnf(const Formula& f) { return nnf(f, false); }

bool is_nnf(const Formula& f) {
  if (f.kind() == K::Not) return f.child().kind() == K::Atom;
  for (const auto& c : f.children()) {
    if (!is_nnf(c)) return false;
  }
  return true;
}

}  // namespace relay_mtl::mtl
