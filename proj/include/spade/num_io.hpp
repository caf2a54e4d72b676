#ifndef SPADE_NUM_IO_HPP
#define SPADE_NUM_IO_HPP

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "spade/errors.hpp"

namespace spade {

// 17 significant digits round-trip any double exactly; to_chars/from_chars
// are locale independent, so files are portable and byte-stable.
inline std::string format_g17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ParseError{"invalid number '" + std::string(text) + "' in " + context};
  }
  return v;
}

}  // namespace spade

#endif  // SPADE_NUM_IO_HPP
