#pragma once

#include <string>
#include <string_view>

namespace cefr::text {

/// Decodes UTF-8; invalid bytes become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Number of Unicode scalar values.
std::size_t length(std::string_view s);

/// Lowercases ASCII and the Latin-1 / Latin Extended-A letters used in Estonian.
char32_t to_lower(char32_t c);
std::string lower(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace cefr::text
