#pragma once

#include <string>
#include <string_view>

namespace atomkg {

// Canonical string key used everywhere two pieces of text are compared:
// Unicode NFC composition, leading/trailing whitespace trimmed, internal
// whitespace runs collapsed to a single space.  Case is preserved — case
// changes meaning, whitespace does not.
std::string normalize_text(std::string_view raw);

// Replaces the first occurrence of placeholder (e.g. "{text}") in a prompt
// template; the template is returned unchanged when absent.
std::string substitute_placeholder(std::string text,
                                   const std::string& placeholder,
                                   const std::string& value);

// Unicode default case folding (UTF-8 in and out), for case-insensitive
// comparisons beyond ASCII — e.g. "Šafov" folds equal to "šafov".
std::string fold_case(const std::string& text);

}  // namespace atomkg
