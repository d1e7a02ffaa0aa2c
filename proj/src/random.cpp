#include "bmm/random.hpp"

namespace bmm {

static_assert(Philox4x32::block({0, 0, 0, 0}, {0, 0}) ==
              Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});

}  // namespace bmm
