#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace continuum {

// Stage seeds are derived from one global seed so stages can be rerun
// independently yet reproducibly.
uint64_t derive_seed(uint64_t global_seed, const std::string& stage);

std::string base64_encode(const uint8_t* data, size_t len);
std::vector<uint8_t> base64_decode(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::vector<std::string> split(const std::string& line, char delim);

}  // namespace continuum
