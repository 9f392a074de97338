#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace biasaudit {

// 64-bit FNV-1a. Used for schema and config fingerprints; spelled out so the
// value is stable across platforms and standard libraries.
class Fnv64 {
 public:
  void update(std::string_view s) {
    for (unsigned char c : s) step(c);
  }
  void update_byte(unsigned char c) { step(c); }
  std::uint64_t digest() const { return h_; }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = h_;
    for (int i = 15; i >= 0; --i) {
      out[i] = digits[v & 0xf];
      v >>= 4;
    }
    return out;
  }

 private:
  void step(unsigned char c) {
    h_ ^= c;
    h_ *= 0x100000001b3ULL;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

// Percent-encoding for tokens stored in line-oriented model files. Everything
// outside printable ASCII, plus '%' itself, becomes %XX so values containing
// spaces or non-ASCII bytes survive a whitespace-delimited format.
std::string percent_encode(std::string_view s);
std::string percent_decode(std::string_view s);

// Exact double formatting for model files: hexfloat round-trips bit for bit.
std::string format_double_exact(double v);
double parse_double_exact(std::string_view s);

// Fixed-precision decimal formatting for figures and annotations.
std::string format_fixed(double v, int decimals);

// Replaces characters outside [A-Za-z0-9._-] with '_' for output file names.
std::string sanitize_filename(std::string_view s);

}  // namespace biasaudit
