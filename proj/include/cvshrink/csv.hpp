#pragma once

#include <string>
#include <vector>

#include "cvshrink/core.hpp"

namespace cvshrink {

/// Reads a UTF-8 CSV with a header row into a Dataset.
///
/// Numeric columns pass through at full double precision. Each categorical
/// column expands in place into one indicator column per level, levels sorted
/// lexicographically, named "column=level". Any missing or malformed cell is
/// a ParseError naming the file line. Binary tasks require every target to be
/// 0 or 1.
Dataset ingest_csv(const std::string& path, const std::string& target_column,
                   const std::vector<std::string>& categorical_columns, Task task = Task::continuous);

/// Same, from an in-memory CSV body (used by tests).
Dataset ingest_csv_text(const std::string& text, const std::string& target_column,
                        const std::vector<std::string>& categorical_columns, Task task = Task::continuous);

}  // namespace cvshrink
