#pragma once

#include <stdexcept>
#include <string>

namespace vppm {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Invariant violation in a scenario file, with the offending field path.
struct ValidationError : std::runtime_error {
  std::string field;
  std::string rule;
  ValidationError(std::string field_, std::string rule_)
      : std::runtime_error(field_ + ": " + rule_),
        field(std::move(field_)),
        rule(std::move(rule_)) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// Demand unservable under trade caps and device limits.
struct InfeasibleDispatch : std::runtime_error {
  std::string vpp_id;
  int hour;  // 1-based binding hour
  InfeasibleDispatch(std::string vpp_id_, int hour_)
      : std::runtime_error("infeasible dispatch for " + vpp_id_ + " at hour " +
                           std::to_string(hour_)),
        vpp_id(std::move(vpp_id_)),
        hour(hour_) {}
};

struct GridTooLarge : std::runtime_error {
  explicit GridTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct ScenarioMismatch : std::runtime_error {
  explicit ScenarioMismatch(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vppm
