#pragma once

#include <stdexcept>
#include <string>

namespace stq {

/// Raised for invalid inputs and data problems (bad files, shape mismatch,
/// invalid configuration). The CLI maps it to exit status 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

}  // namespace detail
}  // namespace stq
