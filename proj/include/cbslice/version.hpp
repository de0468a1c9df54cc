#ifndef CBSLICE_VERSION_HPP
#define CBSLICE_VERSION_HPP

namespace cbslice {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kDumpFormatVersion = "cbslice-dump/1";

}  // namespace cbslice

#endif
