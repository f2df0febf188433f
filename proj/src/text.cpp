#include "atomkg/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf16.h>

#include "atomkg/errors.hpp"

namespace atomkg {

std::string normalize_text(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || nfc == nullptr) {
    throw Error("Unicode NFC normalizer unavailable");
  }

  const icu::UnicodeString input = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  const icu::UnicodeString composed = nfc->normalize(input, status);
  if (U_FAILURE(status)) {
    throw Error("Unicode NFC normalization failed");
  }

  // Trim and collapse in one pass over code points: whitespace runs become a
  // single ASCII space, but only between non-whitespace characters.
  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < composed.length();) {
    const UChar32 cp = composed.char32At(i);
    i += U16_LENGTH(cp);
    if (u_isUWhiteSpace(cp)) {
      if (!collapsed.isEmpty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      collapsed.append(static_cast<char16_t>(u' '));
      pending_space = false;
    }
    collapsed.append(cp);
  }

  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

std::string substitute_placeholder(std::string text,
                                   const std::string& placeholder,
                                   const std::string& value) {
  const std::size_t at = text.find(placeholder);
  if (at != std::string::npos) text.replace(at, placeholder.size(), value);
  return text;
}

std::string fold_case(const std::string& text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(text);
  s.foldCase();
  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace atomkg
