#ifndef RATIO_LAB_VERSION_HPP_
#define RATIO_LAB_VERSION_HPP_

namespace ratio_lab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ratio_lab

#endif  // RATIO_LAB_VERSION_HPP_
