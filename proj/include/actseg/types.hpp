#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace actseg {

// Malformed or inconsistent input files and records.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration: unknown landmark, bad template, out-of-range knob.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative routine failed to make numerical progress.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered list of label names. Indices are 0..size()-1 and stable across
/// save/load.
class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  explicit LabelAlphabet(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int label) const { return names_.at(label); }
  const std::vector<std::string>& names() const { return names_; }

  /// Index of a name, or -1 if absent.
  int find(const std::string& name) const;

  bool operator==(const LabelAlphabet& other) const = default;

 private:
  std::vector<std::string> names_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point& other) const = default;
};

/// (X, Y) trajectory in meters, length T >= 1.
using ObservationSequence = std::vector<Point>;

/// Label status of one sequence position: a known label, fully unknown, or
/// restricted to a non-empty subset of the alphabet.
class PositionLabel {
 public:
  static PositionLabel visible(int label);
  static PositionLabel hidden();
  static PositionLabel allowed_set(std::vector<int> labels);

  bool is_visible() const { return kind_ == Kind::Visible; }
  bool is_hidden() const { return kind_ == Kind::Hidden; }
  bool is_allowed_set() const { return kind_ == Kind::AllowedSet; }

  /// Visible positions only.
  int label() const;
  /// AllowedSet positions only; sorted, unique, non-empty.
  const std::vector<int>& allowed() const;

  bool operator==(const PositionLabel& other) const = default;

 private:
  enum class Kind { Visible, Hidden, AllowedSet };
  Kind kind_ = Kind::Hidden;
  int label_ = -1;
  std::vector<int> allowed_;
};

struct SequenceMeta {
  std::string scenario;
  std::uint64_t seed = 0;

  bool operator==(const SequenceMeta& other) const = default;
};

/// Observation trajectory plus per-position label status.
struct LabeledSequence {
  ObservationSequence obs;
  std::vector<PositionLabel> labels;
  SequenceMeta meta;

  int length() const { return static_cast<int>(obs.size()); }

  bool operator==(const LabeledSequence& other) const = default;
};

struct Dataset {
  LabelAlphabet alphabet;
  std::vector<LabeledSequence> sequences;

  int size() const { return static_cast<int>(sequences.size()); }

  bool operator==(const Dataset& other) const = default;
};

/// Checks the per-sequence invariants: T >= 1, finite coordinates, label
/// arrays of matching length, label indices inside the alphabet.
void validate_sequence(const LabeledSequence& seq, int num_labels);

}  // namespace actseg
