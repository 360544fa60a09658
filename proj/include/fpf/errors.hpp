#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fpf {

/// A state or particle became non-finite. Usually means dt is too large
/// for the drift, or the model itself is unstable over the horizon.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::size_t step, std::optional<std::size_t> particle, const std::string& what)
      : std::runtime_error(what), step_(step), particle_(particle) {}

  std::size_t step() const noexcept { return step_; }
  std::optional<std::size_t> particle() const noexcept { return particle_; }

private:
  std::size_t step_;
  std::optional<std::size_t> particle_;
};

/// Every importance weight underflowed to zero.
class FilterCollapseError : public std::runtime_error {
public:
  FilterCollapseError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// Posterior mass reached the edge of the oracle grid.
class GridTooSmallError : public std::runtime_error {
public:
  GridTooSmallError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

}  // namespace fpf
