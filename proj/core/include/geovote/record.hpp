#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace geovote {

/// One labeled instance of a stream.
struct StreamRecord {
  std::vector<double> features;
  std::size_t label = 0;
  std::uint64_t seq = 0;
};

}  // namespace geovote
