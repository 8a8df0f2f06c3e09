#ifndef NLCH_VERSION_HPP
#define NLCH_VERSION_HPP

namespace nlch {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
