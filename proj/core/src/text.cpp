#include "sana/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include <array>
#include <fstream>

#include "sana/error.hpp"

namespace sana::text {
namespace {

constexpr UChar32 kTatweel = 0x0640;
constexpr UChar32 kAlef = 0x0627;

bool is_arabic_diacritic(UChar32 c) {
  return (c >= 0x064B && c <= 0x065F) || c == 0x0670;
}

bool is_alef_variant(UChar32 c) { return c == 0x0622 || c == 0x0623 || c == 0x0625; }

std::u32string decode(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const int32_t length = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) throw Error(ErrorCode::EncodingError, "ill-formed UTF-8 sequence");
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

void append_utf8(std::string& out, char32_t c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  U8_APPEND_UNSAFE(buf, n, static_cast<UChar32>(c));
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size() * 2);
  for (char32_t c : cps) append_utf8(out, c);
  return out;
}

bool is_white(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

bool is_token_letter(char32_t c32) {
  const auto c = static_cast<UChar32>(c32);
  if (u_isdigit(c)) return true;
  if (!u_isalpha(c)) return false;
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(c, &status);
  return U_SUCCESS(status) && (script == USCRIPT_ARABIC || script == USCRIPT_LATIN);
}

bool is_combining_mark(char32_t c) {
  return u_charType(static_cast<UChar32>(c)) == U_NON_SPACING_MARK;
}

// Affix tables, longest first so the first applicable candidate wins.
const std::array<std::u32string, 7>& prefixes() {
  static const std::array<std::u32string, 7> table = {
      U"وال",
      U"بال",
      U"كال",
      U"فال",
      U"لل",
      U"ال",
      U"و",
  };
  return table;
}

const std::array<std::u32string, 9>& suffixes() {
  static const std::array<std::u32string, 9> table = {
      U"ها",
      U"ان",
      U"ات",
      U"ون",
      U"ين",
      U"ية",
      U"ه",
      U"ة",
      U"ي",
  };
  return table;
}

constexpr std::size_t kMinStemLetters = 3;

}  // namespace

bool is_valid_utf8(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const int32_t length = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

std::string nfc(std::string_view text) {
  if (!is_valid_utf8(text)) throw Error(ErrorCode::EncodingError, "ill-formed UTF-8 sequence");
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::EncodingError, "ICU NFC normalizer unavailable");
  const icu::UnicodeString source =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (normalizer->isNormalized(source, status) && U_SUCCESS(status)) return std::string(text);
  status = U_ZERO_ERROR;
  const icu::UnicodeString result = normalizer->normalize(source, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::EncodingError, "NFC normalization failed");
  std::string out;
  result.toUTF8String(out);
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  const std::u32string cps = decode(text);
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_white(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return encode(out);
}

std::string normalize(std::string_view text, const NormalizeOptions& options) {
  const std::u32string cps = decode(nfc(text));
  std::u32string folded;
  folded.reserve(cps.size());
  bool changed = false;
  bool after_alef = false;  // last starter emitted was a bare alef
  for (char32_t c : cps) {
    const auto cp = static_cast<UChar32>(c);
    const bool combining = u_getCombiningClass(cp) != 0;
    // Madda/hamza marks on an alef would recompose into a variant under NFC.
    if (options.normalize_alef && after_alef && cp >= 0x0653 && cp <= 0x0655) {
      changed = true;
      continue;
    }
    if (options.strip_diacritics && is_arabic_diacritic(cp)) {
      changed = true;
      continue;
    }
    if (options.strip_tatweel && cp == kTatweel) {
      changed = true;
      continue;
    }
    if (!combining) after_alef = false;
    if (options.normalize_alef && is_alef_variant(cp)) {
      folded.push_back(static_cast<char32_t>(kAlef));
      changed = true;
      after_alef = true;
      continue;
    }
    if (cp == kAlef) after_alef = true;
    folded.push_back(c);
  }
  // Removing marks can make neighbours composable again.
  std::string out = encode(folded);
  if (changed) out = nfc(out);
  return collapse_whitespace(out);
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::u32string current;
  auto flush = [&] {
    if (current.empty()) return;
    std::string s = encode(current);
    tokens.push_back(Token{s, s});
    current.clear();
  };
  for (char32_t c : decode(text)) {
    if (is_token_letter(c) || (!current.empty() && is_combining_mark(c))) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::string light_stem(std::string_view token) {
  std::u32string word = decode(token);
  for (const auto& prefix : prefixes()) {
    if (word.size() >= prefix.size() + kMinStemLetters && word.starts_with(prefix)) {
      word.erase(0, prefix.size());
      break;
    }
  }
  for (const auto& suffix : suffixes()) {
    if (word.size() >= suffix.size() + kMinStemLetters && word.ends_with(suffix)) {
      word.erase(word.size() - suffix.size());
      break;
    }
  }
  return encode(word);
}

std::vector<Token> remove_stopwords(std::vector<Token> tokens, const StopwordSet& stopwords) {
  if (stopwords.empty()) return tokens;
  std::erase_if(tokens, [&](const Token& t) {
    return stopwords.contains(t.stem) || stopwords.contains(t.surface);
  });
  return tokens;
}

std::vector<std::string> default_stopwords() {
  return {
      "في",  "من",  "على", "إلى", "عن",  "هذا", "هذه", "الذي", "التي", "كان", "ما",
      "لا",  "و",   "يا",  "أن",  "إن",  "هو",  "هي",  "قد",   "كل",   "ثم",  "أو",
      "لم",  "لن",  "بعد", "قبل", "عند", "غير", "بين", "حتى",  "إذا",  "لكن",
  };
}

std::vector<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open stop-word file " + path.string());
  std::vector<std::string> words;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (!is_valid_utf8(line)) {
      throw Error(ErrorCode::EncodingError,
                  path.string() + ":" + std::to_string(line_no) + ": ill-formed UTF-8");
    }
    std::string word = collapse_whitespace(line);
    if (!word.empty()) words.push_back(std::move(word));
  }
  return words;
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  for (const auto& word : config_.stopwords) {
    std::string n = normalize(word, config_.normalize);
    if (!n.empty()) stopwords_.insert(std::move(n));
  }
}

std::vector<Token> Pipeline::process(std::string_view text) const {
  std::vector<Token> tokens = tokenize(normalize(text, config_.normalize));
  if (config_.light_stem) {
    for (auto& t : tokens) t.stem = light_stem(t.surface);
  }
  return remove_stopwords(std::move(tokens), stopwords_);
}

std::vector<std::string> Pipeline::stems(std::string_view text) const {
  std::vector<std::string> out;
  for (auto& t : process(text)) out.push_back(std::move(t.stem));
  return out;
}

}  // namespace sana::text
