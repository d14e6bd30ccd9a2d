#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace levyssm::io {

// Shortest round-trip decimal representation; keeps CSV output byte-stable.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Numeric CSV with a header line; parse failures report the 1-based line.
Csv read_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string sha1_hex(std::string_view data);

// Git-style content hash: sha1("blob <size>\0" + content).
std::string git_blob_hash(std::string_view content);

}  // namespace levyssm::io
