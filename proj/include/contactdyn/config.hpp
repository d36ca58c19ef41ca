#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace contactdyn::config {

/// Malformed config text; what() carries "line L, column C: ...".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line;
  std::size_t column;
};

/// Well-formed config that fails kind-specific checks; what() names the field path.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the key/value tree subset used by scenarios:
///   # comments, [table] and [dotted.table] headers, key = value with bare,
///   quoted or dotted keys; values are numbers, "strings", true/false and
///   (possibly nested, possibly multi-line) arrays. Integers stay integers.
nlohmann::json parse(const std::string& text);
nlohmann::json parse_file(const std::string& path);

/// Comments stripped, keys sorted, whitespace normalised.
std::string canonical(const nlohmann::json& tree);
std::uint64_t hash(const nlohmann::json& tree);

}  // namespace contactdyn::config
