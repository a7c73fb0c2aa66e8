#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "cbrw/errors.hpp"

namespace cbrw {

/// Lattice point (or jump offset) in Z^d.
using Point = std::vector<int>;

inline Point origin(int dim) { return Point(static_cast<size_t>(dim), 0); }

inline bool is_origin(const Point& p) {
  for (int c : p)
    if (c != 0) return false;
  return true;
}

inline Point negated(const Point& p) {
  Point q(p);
  for (int& c : q) c = -c;
  return q;
}

inline Point add(const Point& a, const Point& b) {
  Point r(a);
  for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

inline Point sub(const Point& a, const Point& b) {
  Point r(a);
  for (size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

inline double dot(const Point& z, const std::vector<double>& theta) {
  double s = 0;
  for (size_t i = 0; i < z.size(); ++i) s += z[i] * theta[i];
  return s;
}

/// true if p precedes its negation lexicographically; used to pick one
/// representative of each +/- offset pair.
inline bool is_canonical_half(const Point& p) {
  for (int c : p) {
    if (c > 0) return true;
    if (c < 0) return false;
  }
  return false;  // the origin belongs to neither half
}

inline std::string point_to_string(const Point& p) {
  std::ostringstream os;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) os << ',';
    os << p[i];
  }
  return os.str();
}

inline Point parse_point(const std::string& text, int dim) {
  Point p;
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, ',')) {
    try {
      p.push_back(std::stoi(part));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "invalid lattice coordinate '" + part + "'");
    }
  }
  require(static_cast<int>(p.size()) == dim, ErrorCode::ParseError,
          "point '" + text + "' has " + std::to_string(p.size()) +
              " coordinates, expected " + std::to_string(dim));
  return p;
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4);
  return h;
}

inline uint64_t point_hash(const Point& p) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (int c : p) h = hash_combine(h, static_cast<uint64_t>(static_cast<int64_t>(c)));
  return h;
}

}  // namespace cbrw
