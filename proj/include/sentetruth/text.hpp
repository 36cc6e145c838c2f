#pragma once

// Unicode text utilities backed by ICU: canonical form for exact-match
// grouping and the tokenizer used by the TF-IDF provider.

#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "sentetruth/error.hpp"

namespace sentetruth::text {

namespace detail {

inline icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

inline std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

inline void append_code_point(std::string& out, UChar32 c) {
  icu::UnicodeString tmp(c);
  tmp.toUTF8String(out);
}

}  // namespace detail

/// NFC-normalizes, trims, and collapses internal whitespace runs to a single
/// ASCII space.
inline std::string canonicalize(std::string_view content) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorCode::InvalidArgument, "ICU NFC normalizer unavailable");
  const icu::UnicodeString normalized = nfc->normalize(detail::from_utf8(content), status);
  if (U_FAILURE(status)) fail(ErrorCode::InvalidArgument, "NFC normalization failed");

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < normalized.length(); i = normalized.moveIndex32(i, 1)) {
    const UChar32 c = normalized.char32At(i);
    if (u_isUWhiteSpace(c)) {
      pending_space = !collapsed.isEmpty();
      continue;
    }
    if (pending_space) collapsed.append(static_cast<UChar>(u' '));
    pending_space = false;
    collapsed.append(c);
  }
  return detail::to_utf8(collapsed);
}

/// Han, Hiragana and Katakana code points are segmented per character.
inline bool is_cjk(UChar32 c) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(c, &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA;
}

/// Lowercases, then splits on anything that is neither a letter, digit nor
/// combining mark. Runs of CJK characters yield every single character
/// followed by every overlapping bigram of the run.
inline std::vector<std::string> tokenize(std::string_view content) {
  icu::UnicodeString s = detail::from_utf8(content);
  s.toLower(icu::Locale::getRoot());

  std::vector<std::string> tokens;
  std::string word;
  std::vector<UChar32> cjk_run;

  const auto flush_word = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  const auto flush_cjk = [&] {
    for (const UChar32 c : cjk_run) {
      std::string one;
      detail::append_code_point(one, c);
      tokens.push_back(std::move(one));
    }
    for (std::size_t i = 0; i + 1 < cjk_run.size(); ++i) {
      std::string pair;
      detail::append_code_point(pair, cjk_run[i]);
      detail::append_code_point(pair, cjk_run[i + 1]);
      tokens.push_back(std::move(pair));
    }
    cjk_run.clear();
  };

  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) {
    const UChar32 c = s.char32At(i);
    if (is_cjk(c)) {
      flush_word();
      cjk_run.push_back(c);
    } else if (u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0) {
      flush_cjk();
      detail::append_code_point(word, c);
    } else {
      flush_word();
      flush_cjk();
    }
  }
  flush_word();
  flush_cjk();
  return tokens;
}

/// Splits a UTF-8 string into code points, each re-encoded as UTF-8.
inline std::vector<std::string> code_points(std::string_view content) {
  const icu::UnicodeString s = detail::from_utf8(content);
  std::vector<std::string> out;
  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) {
    std::string cp;
    detail::append_code_point(cp, s.char32At(i));
    out.push_back(std::move(cp));
  }
  return out;
}

inline bool is_valid_utf8(std::string_view s) {
  int32_t i = 0;
  const auto length = static_cast<int32_t>(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

}  // namespace sentetruth::text
