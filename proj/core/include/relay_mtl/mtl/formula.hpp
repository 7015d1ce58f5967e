#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace relay_mtl::mtl {

/// Discrete time interval [lo, hi] over sample indices; `hi == nullopt` means unbounded.
struct TimeInterval {
  int lo = 0;
  std::optional<int> hi;

  TimeInterval() = default;
  TimeInterval(int lo_, std::optional<int> hi_);

  static TimeInterval unbounded() { return TimeInterval(0, std::nullopt); }
  bool bounded() const { return hi.has_value(); }
  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Ball ||subject - center|| <= radius in the Euclidean norm. The center is either another
/// signal of the trace (e.g. an explorer estimate) or a constant point.
struct NormBall {
  std::string subject;
  std::string center_signal;  // empty when `center` is used
  Eigen::VectorXd center;
  double radius = 0.0;
};

/// Axis-aligned closed box lo <= subject <= hi.
struct BoxRegion {
  std::string subject;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

class Trace;

struct AtomicPredicate {
  std::string id;
  std::variant<NormBall, BoxRegion> geometry;

  /// Throws std::invalid_argument when radius < 0, box bounds are inverted or dimensions differ.
  void validate() const;
  /// Whether sample `j` (0 <= j <= H) of the trace lies in O(pi).
  bool holds(const Trace& trace, int j) const;
  /// Whether the given point lies in O(pi) when the center (if any) is `center`.
  bool contains(const Eigen::VectorXd& point, const Eigen::VectorXd* center) const;
  const std::string& subject() const;
};

using AtomPtr = std::shared_ptr<const AtomicPredicate>;
using AtomTable = std::map<std::string, AtomPtr>;

/// Immutable MTL formula. Nodes are shared; copies are cheap.
///
/// Besides the core syntax this carries two nodes produced by formula
/// specialization: `False`, and `At(k, f)`, which evaluates `f` at the absolute sample
/// index `k` regardless of the index it is evaluated at.
class Formula {
 public:
  enum class Kind { True, False, Atom, Not, And, Or, Until, Eventually, Always, At };

  static Formula truth();
  static Formula falsity();
  static Formula atom(AtomPtr predicate);
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> children);
  static Formula disjunction(std::vector<Formula> children);
  static Formula until(TimeInterval interval, Formula lhs, Formula rhs);
  static Formula eventually(TimeInterval interval, Formula f);
  static Formula always(TimeInterval interval, Formula f);
  static Formula at(int index, Formula f);

  Kind kind() const { return node_->kind; }
  const std::vector<Formula>& children() const { return node_->children; }
  const Formula& child(std::size_t i = 0) const { return node_->children.at(i); }
  const TimeInterval& interval() const { return node_->interval; }
  const AtomicPredicate& predicate() const { return *node_->atom; }
  const AtomPtr& predicate_ptr() const { return node_->atom; }
  int index() const { return node_->index; }

  /// Stable identity of the shared node (used for memoisation).
  const void* id() const { return node_.get(); }

  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }

 private:
  struct Node {
    Kind kind = Kind::True;
    std::vector<Formula> children;
    TimeInterval interval;
    AtomPtr atom;
    int index = 0;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Node node);

  std::shared_ptr<const Node> node_;
};

/// Structural equality (atoms compared by id).
bool structurally_equal(const Formula& a, const Formula& b);

/// Prints the formula in the concrete syntax accepted by `parse_formula`.
std::string to_string(const Formula& f);

/// Sampled multi-signal trajectory y^{0:H} on the grid t[j] = j * sampling_period.
class Trace {
 public:
  Trace() = default;
  explicit Trace(double sampling_period) : sampling_period_(sampling_period) {}

  /// Adds (or replaces) a signal; all signals must have the same length.
  void set_signal(const std::string& name, std::vector<Eigen::VectorXd> samples);
  /// Appends one sample to an existing or new signal (used while a run is in progress).
  void push_sample(const std::string& name, const Eigen::VectorXd& sample);

  bool has_signal(const std::string& name) const { return signals_.count(name) != 0; }
  /// Throws UnknownSignalError when absent.
  const std::vector<Eigen::VectorXd>& signal(const std::string& name) const;
  const std::map<std::string, std::vector<Eigen::VectorXd>>& signals() const { return signals_; }

  /// H: index of the last sample (-1 for an empty trace).
  int horizon() const;
  double sampling_period() const { return sampling_period_; }
  double time(int j) const { return sampling_period_ * j; }

  /// The first `count` samples of every signal.
  Trace prefix(int count) const;

 private:
  double sampling_period_ = 1.0;
  std::map<std::string, std::vector<Eigen::VectorXd>> signals_;
};

class UnknownSignalError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct Verdict {
  bool strong = false;
  bool weak = false;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

}  // namespace relay_mtl::mtl
