#pragma once

#include <string>
#include <vector>

namespace geoinfer::csv {

// Minimal RFC-4180-ish CSV. Fields containing commas, quotes or newlines
// are double-quoted on write; both quoted and bare fields parse on read.

using Row = std::vector<std::string>;

std::vector<Row> read_file(const std::string& path);
std::vector<Row> parse(const std::string& text);

std::string escape(const std::string& field);
std::string join_row(const Row& row);
void write_file(const std::string& path, const std::vector<Row>& rows);

}  // namespace geoinfer::csv
