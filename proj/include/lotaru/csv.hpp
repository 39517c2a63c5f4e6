#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lotaru::csv {

/// Splits one delimited line into fields. Double-quoted fields may contain
/// the delimiter and escaped quotes ("").
std::vector<std::string> split_line(std::string_view line, char delimiter = ',');

/// Quotes a field only when it needs it.
std::string escape(std::string_view field, char delimiter = ',');

std::string join(const std::vector<std::string>& fields, char delimiter = ',');

std::string_view trim(std::string_view s);

}  // namespace lotaru::csv
