#pragma once

#include <string_view>

namespace qnw {

inline constexpr std::string_view kArtifactName = "qnw";
inline constexpr std::string_view kArtifactVersion = "0.1.0";

inline std::string version_string() {
    return std::string(kArtifactName) + " " + std::string(kArtifactVersion);
}

}  // namespace qnw
