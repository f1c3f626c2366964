#pragma once

#include <filesystem>
#include <string>

namespace tokvar {

// shortest decimal form that parses back to the same double
std::string format_double(double value);

// write-temp-then-rename so readers never observe a partial file
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);  // throws InputError

}  // namespace tokvar
