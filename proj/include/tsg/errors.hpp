#ifndef TSG_ERRORS_HPP
#define TSG_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tsg {

// Invalid hyperparameters or option combinations.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed text input (LIBSVM lines, manifests). Carries a 1-based line
// number when the source is line-oriented; 0 means "not line-addressable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")"
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Corrupt or incompatible serialized model payloads.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Dimension disagreement between a vector and the object consuming it.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite score or coefficient; names the iteration that produced it.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::int64_t iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) +
                           ")"),
        iteration_(iteration) {}
  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t iteration_;
};

// Requested computation exceeds the desk-scale limits of this build.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tsg

#endif
