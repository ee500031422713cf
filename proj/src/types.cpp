#include "actseg/types.hpp"

#include <cmath>
#include <set>

namespace actseg {

LabelAlphabet::LabelAlphabet(std::vector<std::string> names)
    : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const std::string& n : names_)
    if (!seen.insert(n).second)
      throw ConfigError("duplicate label name: " + n);
}

int LabelAlphabet::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == name) return i;
  return -1;
}

PositionLabel PositionLabel::visible(int label) {
  if (label < 0) throw std::invalid_argument("visible label must be >= 0");
  PositionLabel p;
  p.kind_ = Kind::Visible;
  p.label_ = label;
  return p;
}

PositionLabel PositionLabel::hidden() { return PositionLabel{}; }

PositionLabel PositionLabel::allowed_set(std::vector<int> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.empty())
    throw std::invalid_argument("allowed set must be non-empty");
  PositionLabel p;
  p.kind_ = Kind::AllowedSet;
  p.allowed_ = std::move(labels);
  return p;
}

int PositionLabel::label() const {
  if (!is_visible()) throw std::logic_error("label() on a non-visible position");
  return label_;
}

const std::vector<int>& PositionLabel::allowed() const {
  if (!is_allowed_set())
    throw std::logic_error("allowed() on a non-allowed-set position");
  return allowed_;
}

void validate_sequence(const LabeledSequence& seq, int num_labels) {
  if (seq.obs.empty()) throw DataError("sequence must have length >= 1");
  if (seq.labels.size() != seq.obs.size())
    throw DataError("label array length does not match observation length");
  for (const Point& p : seq.obs)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw DataError("non-finite coordinate");
  for (const PositionLabel& pl : seq.labels) {
    if (pl.is_visible() && pl.label() >= num_labels)
      throw DataError("label out of alphabet range");
    if (pl.is_allowed_set())
      for (int y : pl.allowed())
        if (y < 0 || y >= num_labels)
          throw DataError("allowed-set label out of alphabet range");
  }
}

}  // namespace actseg
