#pragma once

namespace qtm {

inline constexpr const char* kVersion = "0.1.0";

// Stamped into every table written by the CLI; bump when a column layout changes.
inline constexpr const char* kTableFormatVersion = "qtm.table.v1";

}  // namespace qtm
