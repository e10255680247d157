#pragma once

#include <stdexcept>
#include <string>

namespace fiscrisk {

// Error taxonomy shared by the library and the CLI. The enum value doubles
// as the CLI process exit code, so the codes are part of the public
// interface and must stay stable.
enum class ErrorCategory : int {
  io = 2,        // unreadable/unwritable files
  capacity = 3,  // exact tie method beyond the configured tie cap
  parse = 4,     // malformed delimited text, bad numeric cells
  schema = 5,    // missing columns, unknown predictor names
  data = 6,      // duplicate keys, empty panels, degenerate matrices
  model = 7,     // identifiability, divergence, rank failures
  numeric = 8,   // eigen solver failures, non-finite intermediates
  invalid = 9,   // out-of-range arguments
};

const char* to_string(ErrorCategory cat);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& message)
      : std::runtime_error(message), cat_(cat) {}

  ErrorCategory category() const noexcept { return cat_; }
  int exit_code() const noexcept { return static_cast<int>(cat_); }

 private:
  ErrorCategory cat_;
};

[[noreturn]] inline void fail(ErrorCategory cat, const std::string& message) {
  throw Error(cat, message);
}

}  // namespace fiscrisk
