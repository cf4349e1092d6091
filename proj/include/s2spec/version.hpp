#ifndef S2SPEC_VERSION_HPP
#define S2SPEC_VERSION_HPP

namespace s2spec {

inline constexpr const char* kVersion = "0.1.0";

} // namespace s2spec

#endif
