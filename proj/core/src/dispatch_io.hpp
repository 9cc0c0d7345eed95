#pragma once

// Internal binary helpers for the BDSP1 dispatcher container. Layout is raw
// little-endian host order (documented in docs/formats.md); not installed.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "balcl/errors.hpp"

namespace balcl::detail {

inline constexpr char kDispatchMagic[5] = {'B', 'D', 'S', 'P', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), "dispatcher file: truncated");
  return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
  auto len = read_pod<std::uint32_t>(is);
  require(len < (1u << 20), "dispatcher file: unreasonable string length");
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  require(static_cast<bool>(is), "dispatcher file: truncated");
  return s;
}

inline void write_magic(std::ostream& os) { os.write(kDispatchMagic, 5); }

inline void check_magic(std::istream& is) {
  char m[5] = {};
  is.read(m, 5);
  require(static_cast<bool>(is) && std::equal(m, m + 5, kDispatchMagic),
          "dispatcher file: bad magic (expected BDSP1)");
}

}  // namespace balcl::detail
