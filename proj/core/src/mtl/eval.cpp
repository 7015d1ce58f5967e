#include "relay_mtl/mtl/eval.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace relay_mtl::mtl {
namespace {

// Truth of a subformula at every index 0..H, plus the (constant) truth at any index > H.
struct Series {
  std::vector<char> v;
  bool tail = false;

  bool at(long j) const { return j < static_cast<long>(v.size()) ? v[static_cast<std::size_t>(j)] != 0 : tail; }
};

class Evaluator {
 public:
  explicit Evaluator(const Trace& trace) : trace_(trace), h_(trace.horizon()) {}

  const Series& eval(const Formula& f, bool strong) {
    auto key = std::make_pair(f.id(), strong);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Series s = compute(f, strong);
    return memo_.emplace(key, std::move(s)).first->second;
  }

 private:
  Series constant(bool value) const {
    Series s;
    s.v.assign(static_cast<std::size_t>(h_ + 1), value ? 1 : 0);
    s.tail = value;
    return s;
  }

  Series compute(const Formula& f, bool strong) {
    using K = Formula::Kind;
    const std::size_t n = static_cast<std::size_t>(h_ + 1);
    switch (f.kind()) {
      case K::True:
        return constant(true);
      case K::False:
        return constant(false);
      case K::Atom: {
        Series s;
        s.v.resize(n);
        for (int j = 0; j <= h_; ++j) s.v[static_cast<std::size_t>(j)] = f.predicate().holds(trace_, j) ? 1 : 0;
        s.tail = !strong;
        return s;
      }
      case K::Not: {
        Series s = eval(f.child(), !strong);
        for (auto& b : s.v) b = b ? 0 : 1;
        s.tail = !s.tail;
        return s;
      }
      case K::And:
      case K::Or: {
        const bool conj = f.kind() == K::And;
        Series s = constant(conj);
        for (const auto& c : f.children()) {
          const Series& cs = eval(c, strong);
          for (std::size_t j = 0; j < n; ++j) s.v[j] = conj ? (s.v[j] && cs.v[j]) : (s.v[j] || cs.v[j]);
          s.tail = conj ? (s.tail && cs.tail) : (s.tail || cs.tail);
        }
        return s;
      }
      case K::At: {
        const Series& cs = eval(f.child(), strong);
        return constant(cs.at(f.index()));
      }
      case K::Eventually:
      case K::Always:
        return window(eval(f.child(), strong), f.interval(), f.kind() == K::Eventually);
      case K::Until:
        return until(eval(f.child(0), strong), eval(f.child(1), strong), f.interval());
    }
    throw std::logic_error("unhandled formula kind");
  }

  // Exists (or forall) over j + I; indices past H all share the tail value.
  Series window(const Series& c, const TimeInterval& iv, bool exists) const {
    Series s;
    s.v.resize(static_cast<std::size_t>(h_ + 1));
    for (long j = 0; j <= h_; ++j) {
      const long a = j + iv.lo;
      const bool reaches_tail = !iv.hi || j + *iv.hi > h_;
      const long b = std::min<long>(iv.hi ? j + *iv.hi : h_, h_);
      bool acc = !exists;
      for (long k = a; k <= b; ++k) {
        if (c.at(k) == exists) {
          acc = exists;
          break;
        }
      }
      if (acc != exists && reaches_tail && c.tail == exists) acc = exists;
      s.v[static_cast<std::size_t>(j)] = acc ? 1 : 0;
    }
    s.tail = c.tail;
    return s;
  }

  Series until(const Series& c1, const Series& c2, const TimeInterval& iv) const {
    Series s;
    s.v.resize(static_cast<std::size_t>(h_ + 1));
    const long past = h_ + 1;
    for (long j = 0; j <= h_; ++j) {
      const long first = j + iv.lo;
      const long last = iv.hi ? j + *iv.hi : -1;  // -1: unbounded
      // lhs must hold on [j, first)
      bool prefix = true;
      for (long k = j; k < std::min(first, past) && prefix; ++k) prefix = c1.at(k);
      if (prefix && first > past) prefix = c1.tail;
      bool ok = false;
      for (long jp = first; prefix && (last < 0 || jp <= last); ++jp) {
        if (c2.at(jp)) {
          ok = true;
          break;
        }
        // every later witness past H sees the same rhs value and a longer lhs prefix
        if (jp >= past) break;
        prefix = c1.at(jp);
      }
      s.v[static_cast<std::size_t>(j)] = ok ? 1 : 0;
    }
    s.tail = c2.tail && (iv.lo == 0 || c1.tail);
    return s;
  }

  const Trace& trace_;
  int h_;
  std::map<std::pair<const void*, bool>, Series> memo_;
};

}  // namespace

bool eval_strong(const Trace& trace, const Formula& f, int j) { return evaluate(trace, f, j).strong; }

bool eval_weak(const Trace& trace, const Formula& f, int j) { return evaluate(trace, f, j).weak; }

Verdict evaluate(const Trace& trace, const Formula& f, int j) {
  if (j < 0) throw std::invalid_argument("evaluation index must be non-negative");
  Evaluator ev(trace);
  const bool strong = ev.eval(f, true).at(j);
  const bool weak = ev.eval(f, false).at(j);
  return Verdict{strong, weak};
}

std::optional<int> necessary_length(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True:
    case K::False:
    case K::Atom:
      return 0;
    case K::Not:
      return necessary_length(f.child());
    case K::And:
    case K::Or:
    case K::Until: {
      int best = 0;
      for (const auto& c : f.children()) {
        auto l = necessary_length(c);
        if (!l) return std::nullopt;
        best = std::max(best, *l);
      }
      if (f.kind() != K::Until) return best;
      if (!f.interval().hi) return std::nullopt;
      return best + *f.interval().hi;
    }
    case K::Eventually:
    case K::Always: {
      auto l = necessary_length(f.child());
      if (!l || !f.interval().hi) return std::nullopt;
      return *l + *f.interval().hi;
    }
    case K::At: {
      auto l = necessary_length(f.child());
      if (!l) return std::nullopt;
      return f.index() + *l;
    }
  }
  return std::nullopt;
}

}  // namespace relay_mtl::mtl
