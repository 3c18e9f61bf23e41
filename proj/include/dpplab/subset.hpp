#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "dpplab/errors.hpp"

namespace dpplab {

// Subsets of the ground set [N] are bitmasks: bit i set <=> item i in J.
using Mask = std::uint64_t;

inline constexpr int kMaxGroundSize = 63;  // masks must fit in 64 bits
inline constexpr int kMaxEnumerable = 20;  // cap for 2^N table construction

inline void check_ground_size(int n) {
  if (n < 1 || n > kMaxGroundSize) {
    throw ValidationError("ground size must be in [1, " +
                          std::to_string(kMaxGroundSize) + "], got " +
                          std::to_string(n));
  }
}

inline void check_enumerable(int n) {
  check_ground_size(n);
  if (n > kMaxEnumerable) {
    throw CapacityError("refusing to enumerate 2^" + std::to_string(n) +
                        " subsets (cap is N=" + std::to_string(kMaxEnumerable) +
                        ")");
  }
}

inline Mask full_mask(int n) { return (Mask{1} << n) - 1; }

inline bool subset_valid(Mask J, int n) { return (J & ~full_mask(n)) == 0; }

inline void check_subset(Mask J, int n) {
  if (!subset_valid(J, n)) {
    throw ValidationError("subset mask " + std::to_string(J) +
                          " has items outside ground set of size " +
                          std::to_string(n));
  }
}

inline int subset_size(Mask J) { return std::popcount(J); }

inline std::vector<int> subset_items(Mask J) {
  std::vector<int> items;
  items.reserve(static_cast<std::size_t>(subset_size(J)));
  while (J != 0) {
    items.push_back(std::countr_zero(J));
    J &= J - 1;
  }
  return items;
}

inline Mask mask_from_items(const std::vector<int>& items, int n) {
  check_ground_size(n);
  Mask J = 0;
  for (int i : items) {
    if (i < 0 || i >= n) {
      throw ValidationError("item index " + std::to_string(i) +
                            " outside ground set of size " + std::to_string(n));
    }
    J |= Mask{1} << i;
  }
  return J;
}

// "{0,2,5}"; the empty set prints as "{}".
inline std::string subset_to_string(Mask J) {
  std::string out = "{";
  bool first = true;
  for (int i : subset_items(J)) {
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

// Accepts "0,2,5", "{0,2,5}", or "" / "{}" for the empty set.
inline Mask subset_from_string(const std::string& s, int n) {
  std::string body = s;
  if (!body.empty() && body.front() == '{') {
    if (body.back() != '}') throw IoError("unbalanced braces in subset: " + s);
    body = body.substr(1, body.size() - 2);
  }
  std::vector<int> items;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    std::string tok = body.substr(pos, comma == std::string::npos
                                           ? std::string::npos
                                           : comma - pos);
    std::size_t first = tok.find_first_not_of(" \t");
    if (first != std::string::npos) {
      std::size_t last = tok.find_last_not_of(" \t");
      tok = tok.substr(first, last - first + 1);
      try {
        items.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw IoError("bad item token '" + tok + "' in subset: " + s);
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return mask_from_items(items, n);
}

}  // namespace dpplab
