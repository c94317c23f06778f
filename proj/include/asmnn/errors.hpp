#pragma once

#include <stdexcept>
#include <string>

namespace asmnn {

// A bit-group value the configured alphabet set cannot produce by
// select+shift. Reaching this at multiply time means the weight was
// never run through the constraint pass.
class UnsupportedGroupValue : public std::domain_error {
 public:
  UnsupportedGroupValue(int value, const std::string& set_name)
      : std::domain_error("group value " + std::to_string(value) +
                          " is not supported by alphabet set " + set_name),
        value_(value) {}

  int value() const { return value_; }

 private:
  int value_;
};

// Even the full alphabet set failed the K >= J*Q gate.
class QualityUnreachable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed external input: IDX files, model files, config files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asmnn
