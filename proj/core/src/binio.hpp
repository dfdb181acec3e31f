#pragma once

// Internal little-endian binary IO helpers shared by the cache/checkpoint
// writers. Not installed.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace metags::detail {

inline void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
inline void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
inline void write_i32(std::ostream& out, int32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
inline void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
inline void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, uint32_t(s.size()));
  out.write(s.data(), long(s.size()));
}
inline void write_f64v(std::ostream& out, const std::vector<double>& v) {
  write_u32(out, uint32_t(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()), long(v.size() * sizeof(double)));
}
inline void write_i32v(std::ostream& out, const std::vector<int>& v) {
  write_u32(out, uint32_t(v.size()));
  for (int x : v) write_i32(out, x);
}

inline uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
inline uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
inline int32_t read_i32(std::istream& in) {
  int32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
inline double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
inline std::string read_str(std::istream& in) {
  uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), long(len));
  return s;
}
inline std::vector<double> read_f64v(std::istream& in) {
  uint32_t len = read_u32(in);
  std::vector<double> v(len);
  in.read(reinterpret_cast<char*>(v.data()), long(len * sizeof(double)));
  return v;
}
inline std::vector<int> read_i32v(std::istream& in) {
  uint32_t len = read_u32(in);
  std::vector<int> v(len);
  for (uint32_t i = 0; i < len; ++i) v[i] = read_i32(in);
  return v;
}

}  // namespace metags::detail
