#ifndef VBROADCAST_LAYOUT_HPP
#define VBROADCAST_LAYOUT_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace vbroadcast {

struct Subsystem {
  std::string label;
  std::size_t dim;
};

// Ordered list of labeled subsystems. Subsystems are listed left-to-right in
// tensor factor order; the first factor is the most significant digit of a
// flat matrix index, matching kron().
class SystemLayout {
public:
  SystemLayout() = default;
  explicit SystemLayout(std::vector<Subsystem> subsystems);

  std::size_t size() const { return subsystems_.size(); }
  std::size_t total_dim() const { return total_dim_; }
  const Subsystem &at(std::size_t i) const { return subsystems_[i]; }
  const std::vector<Subsystem> &subsystems() const { return subsystems_; }

  bool has(const std::string &label) const;
  // throws std::invalid_argument for an unknown label
  std::size_t index_of(const std::string &label) const;

  // flat index <-> per-subsystem digits (big-endian mixed radix)
  std::vector<std::size_t> digits(std::size_t flat) const;
  std::size_t flat(const std::vector<std::size_t> &digits) const;

  // layout consisting of the subsystems at the given positions, in that order
  SystemLayout select(const std::vector<std::size_t> &positions) const;

  bool operator==(const SystemLayout &other) const;

private:
  std::vector<Subsystem> subsystems_;
  std::size_t total_dim_ = 1;
};

} // namespace vbroadcast

#endif
