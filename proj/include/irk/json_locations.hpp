#ifndef IRK_JSON_LOCATIONS_HPP
#define IRK_JSON_LOCATIONS_HPP

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace irk {

/// 1-based line of every value in a syntactically valid JSON document, keyed
/// by RFC 6901 JSON pointer ("" is the root). Object members map to the line
/// of their key. Scanning stops silently at the first malformed token.
std::map<std::string, int> json_value_lines(std::string_view text);

/// 1-based line containing byte `offset` (clamped to the text length).
int line_of_offset(std::string_view text, std::size_t offset);

/// Escapes one reference token for use in a JSON pointer.
std::string json_pointer_escape(std::string_view token);

}  // namespace irk

#endif  // IRK_JSON_LOCATIONS_HPP
