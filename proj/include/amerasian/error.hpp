#pragma once

#include <stdexcept>
#include <string>

namespace amerasian {

// Root of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AMERASIAN_DEFINE_ERROR(Name)   \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  };

AMERASIAN_DEFINE_ERROR(ParameterError)
AMERASIAN_DEFINE_ERROR(IndexError)
AMERASIAN_DEFINE_ERROR(WindowUnderflowError)
AMERASIAN_DEFINE_ERROR(DegenerateFeatureError)
AMERASIAN_DEFINE_ERROR(BasisTooLargeError)
AMERASIAN_DEFINE_ERROR(ShapeError)
AMERASIAN_DEFINE_ERROR(SequencingError)
AMERASIAN_DEFINE_ERROR(InputError)
AMERASIAN_DEFINE_ERROR(OrderError)
AMERASIAN_DEFINE_ERROR(SpecError)
AMERASIAN_DEFINE_ERROR(StabilityError)
AMERASIAN_DEFINE_ERROR(ConfigError)

#undef AMERASIAN_DEFINE_ERROR

// Raised by the Chebyshev Greeks when a node pricing fails.
class NodePricingError : public Error {
 public:
  NodePricingError(int node, double spot, const std::string& what)
      : Error("pricing failed at node " + std::to_string(node) + " (spot " + std::to_string(spot) +
              "): " + what),
        node_(node),
        spot_(spot) {}

  int node() const noexcept { return node_; }
  double spot() const noexcept { return spot_; }

 private:
  int node_;
  double spot_;
};

}  // namespace amerasian
