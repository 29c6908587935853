#include "vbroadcast/layout.hpp"

#include <set>
#include <stdexcept>

namespace vbroadcast {

SystemLayout::SystemLayout(std::vector<Subsystem> subsystems)
    : subsystems_(std::move(subsystems)) {
  std::set<std::string> seen;
  for (const auto &s : subsystems_) {
    if (s.dim == 0)
      throw std::invalid_argument("layout: zero-dimensional subsystem '" +
                                  s.label + "'");
    if (!seen.insert(s.label).second)
      throw std::invalid_argument("layout: duplicate label '" + s.label + "'");
    total_dim_ *= s.dim;
  }
}

bool SystemLayout::has(const std::string &label) const {
  for (const auto &s : subsystems_)
    if (s.label == label)
      return true;
  return false;
}

std::size_t SystemLayout::index_of(const std::string &label) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i)
    if (subsystems_[i].label == label)
      return i;
  throw std::invalid_argument("layout: unknown label '" + label + "'");
}

std::vector<std::size_t> SystemLayout::digits(std::size_t flat) const {
  std::vector<std::size_t> out(subsystems_.size());
  for (std::size_t i = subsystems_.size(); i-- > 0;) {
    out[i] = flat % subsystems_[i].dim;
    flat /= subsystems_[i].dim;
  }
  return out;
}

std::size_t SystemLayout::flat(const std::vector<std::size_t> &digits) const {
  if (digits.size() != subsystems_.size())
    throw std::invalid_argument("layout: digit count mismatch");
  std::size_t out = 0;
  for (std::size_t i = 0; i < subsystems_.size(); ++i)
    out = out * subsystems_[i].dim + digits[i];
  return out;
}

SystemLayout SystemLayout::select(const std::vector<std::size_t> &positions) const {
  std::vector<Subsystem> subs;
  subs.reserve(positions.size());
  for (std::size_t p : positions) {
    if (p >= subsystems_.size())
      throw std::invalid_argument("layout: position out of range");
    subs.push_back(subsystems_[p]);
  }
  return SystemLayout(std::move(subs));
}

bool SystemLayout::operator==(const SystemLayout &other) const {
  if (subsystems_.size() != other.subsystems_.size())
    return false;
  for (std::size_t i = 0; i < subsystems_.size(); ++i)
    if (subsystems_[i].label != other.subsystems_[i].label ||
        subsystems_[i].dim != other.subsystems_[i].dim)
      return false;
  return true;
}

} // namespace vbroadcast
