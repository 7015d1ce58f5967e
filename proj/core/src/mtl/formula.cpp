#include "relay_mtl/mtl/formula.hpp"

#include <sstream>

namespace relay_mtl::mtl {

TimeInterval::TimeInterval(int lo_, std::optional<int> hi_) : lo(lo_), hi(hi_) {
  if (lo < 0) throw std::invalid_argument("time interval lower bound must be non-negative");
  if (hi && *hi < lo) {
    throw std::invalid_argument("time interval [" + std::to_string(lo) + "," +
                                std::to_string(*hi) + "] has lo > hi");
  }
}

void AtomicPredicate::validate() const {
  if (const auto* ball = std::get_if<NormBall>(&geometry)) {
    if (!(ball->radius >= 0.0)) throw std::invalid_argument("atom '" + id + "': radius must be >= 0");
    if (ball->center_signal.empty() && ball->center.size() == 0) {
      throw std::invalid_argument("atom '" + id + "': ball needs a center signal or point");
    }
  } else {
    const auto& box = std::get<BoxRegion>(geometry);
    if (box.lo.size() != box.hi.size() || box.lo.size() == 0) {
      throw std::invalid_argument("atom '" + id + "': box bounds have mismatched dimensions");
    }
    for (Eigen::Index k = 0; k < box.lo.size(); ++k) {
      if (!(box.lo(k) <= box.hi(k))) {
        throw std::invalid_argument("atom '" + id + "': box min exceeds max on axis " +
                                    std::to_string(k));
      }
    }
  }
}

const std::string& AtomicPredicate::subject() const {
  return std::visit([](const auto& g) -> const std::string& { return g.subject; }, geometry);
}

bool AtomicPredicate::contains(const Eigen::VectorXd& point, const Eigen::VectorXd* center) const {
  if (const auto* ball = std::get_if<NormBall>(&geometry)) {
    const Eigen::VectorXd& c = center != nullptr ? *center : ball->center;
    if (c.size() != point.size()) {
      throw std::invalid_argument("atom '" + id + "': center and subject dimensions differ");
    }
    return (point - c).norm() <= ball->radius;
  }
  const auto& box = std::get<BoxRegion>(geometry);
  if (box.lo.size() != point.size()) {
    throw std::invalid_argument("atom '" + id + "': box and subject dimensions differ");
  }
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    if (point(k) < box.lo(k) || point(k) > box.hi(k)) return false;
  }
  return true;
}

bool AtomicPredicate::holds(const Trace& trace, int j) const {
  const auto& subj = trace.signal(subject()).at(static_cast<std::size_t>(j));
  if (const auto* ball = std::get_if<NormBall>(&geometry)) {
    if (!ball->center_signal.empty()) {
      const auto& c = trace.signal(ball->center_signal).at(static_cast<std::size_t>(j));
      return contains(subj, &c);
    }
  }
  return contains(subj, nullptr);
}

Formula Formula::make(Node node) { return Formula(std::make_shared<const Node>(std::move(node))); }

Formula Formula::truth() {
  static const Formula t = make(Node{Kind::True, {}, {}, nullptr, 0});
  return t;
}

Formula Formula::falsity() {
  static const Formula f = make(Node{Kind::False, {}, {}, nullptr, 0});
  return f;
}

Formula Formula::atom(AtomPtr predicate) {
  if (!predicate) throw std::invalid_argument("atom formula needs a predicate");
  return make(Node{Kind::Atom, {}, {}, std::move(predicate), 0});
}

Formula Formula::negation(Formula f) { return make(Node{Kind::Not, {std::move(f)}, {}, nullptr, 0}); }

Formula Formula::conjunction(std::vector<Formula> children) {
  if (children.empty()) return truth();
  if (children.size() == 1) return children.front();
  return make(Node{Kind::And, std::move(children), {}, nullptr, 0});
}

Formula Formula::disjunction(std::vector<Formula> children) {
  if (children.empty()) return falsity();
  if (children.size() == 1) return children.front();
  return make(Node{Kind::Or, std::move(children), {}, nullptr, 0});
}

Formula Formula::until(TimeInterval interval, Formula lhs, Formula rhs) {
  return make(Node{Kind::Until, {std::move(lhs), std::move(rhs)}, interval, nullptr, 0});
}

Formula Formula::eventually(TimeInterval interval, Formula f) {
  return make(Node{Kind::Eventually, {std::move(f)}, interval, nullptr, 0});
}

Formula Formula::always(TimeInterval interval, Formula f) {
  return make(Node{Kind::Always, {std::move(f)}, interval, nullptr, 0});
}

Formula Formula::at(int index, Formula f) {
  if (index < 0) throw std::invalid_argument("anchor index must be non-negative");
  return make(Node{Kind::At, {std::move(f)}, {}, nullptr, index});
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.id() == b.id()) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return true;
    case Formula::Kind::Atom:
      return a.predicate().id == b.predicate().id;
    case Formula::Kind::At:
      if (a.index() != b.index()) return false;
      break;
    case Formula::Kind::Until:
    case Formula::Kind::Eventually:
    case Formula::Kind::Always:
      if (!(a.interval() == b.interval())) return false;
      break;
    default:
      break;
  }
  if (a.children().size() != b.children().size()) return false;
  for (std::size_t i = 0; i < a.children().size(); ++i) {
    if (!structurally_equal(a.children()[i], b.children()[i])) return false;
  }
  return true;
}

namespace {

void print_interval(std::ostream& os, const TimeInterval& iv) {
  if (iv.lo == 0 && !iv.hi) return;
  os << '[' << iv.lo << ',';
  if (iv.hi) {
    os << *iv.hi;
  } else {
    os << "inf";
  }
  os << ']';
}

void print(std::ostream& os, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::True:
      os << "true";
      return;
    case K::False:
      os << "false";
      return;
    case K::Atom:
      os << f.predicate().id;
      return;
    case K::Not:
      os << '!';
      print(os, f.child());
      return;
    case K::And:
    case K::Or: {
      os << '(';
      const char* sep = f.kind() == K::And ? " & " : " | ";
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        if (i) os << sep;
        print(os, f.children()[i]);
      }
      os << ')';
      return;
    }
    case K::Until:
      os << '(';
      print(os, f.child(0));
      os << " U";
      print_interval(os, f.interval());
      os << ' ';
      print(os, f.child(1));
      os << ')';
      return;
    case K::Eventually:
    case K::Always:
      os << (f.kind() == K::Eventually ? 'F' : 'G');
      print_interval(os, f.interval());
      os << ' ';
      print(os, f.child());
      return;
    case K::At:
      os << '@' << f.index() << ' ';
      print(os, f.child());
      return;
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print(os, f);
  return os.str();
}

void Trace::set_signal(const std::string& name, std::vector<Eigen::VectorXd> samples) {
  if (!signals_.empty()) {
    const auto& any = signals_.begin();
    if (any->first != name && any->second.size() != samples.size()) {
      throw std::invalid_argument("signal '" + name + "' length " + std::to_string(samples.size()) +
                                  " differs from trace length " + std::to_string(any->second.size()));
    }
  }
  signals_[name] = std::move(samples);
}

void Trace::push_sample(const std::string& name, const Eigen::VectorXd& sample) {
  signals_[name].push_back(sample);
}

const std::vector<Eigen::VectorXd>& Trace::signal(const std::string& name) const {
  auto it = signals_.find(name);
  if (it == signals_.end()) throw UnknownSignalError("trace has no signal '" + name + "'");
  return it->second;
}

int Trace::horizon() const {
  if (signals_.empty()) return -1;
  std::size_t len = signals_.begin()->second.size();
  for (const auto& [name, samples] : signals_) {
    if (samples.size() != len) {
      throw std::logic_error("trace signals have different lengths ('" + name + "')");
    }
  }
  return static_cast<int>(len) - 1;
}

Trace Trace::prefix(int count) const {
  Trace out(sampling_period_);
  for (const auto& [name, samples] : signals_) {
    const auto n = std::min<std::size_t>(samples.size(), static_cast<std::size_t>(std::max(count, 0)));
    out.signals_[name] = std::vector<Eigen::VectorXd>(samples.begin(), samples.begin() + static_cast<long>(n));
  }
  return out;
}

}  // namespace relay_mtl::mtl
