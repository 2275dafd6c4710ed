#pragma once

namespace noprop {

// git-describe of the build, or the project version when git is unavailable.
const char* version_string() noexcept;

} // namespace noprop
