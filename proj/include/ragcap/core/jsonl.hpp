#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ragcap {

// Calls `fn(object, line_number)` for each non-blank line. Parse failures
// become CorruptFile naming the file and line.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// Fetches a required string field, raising CorruptFile with context otherwise.
std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where);

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);
  void write(const nlohmann::json& obj);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace ragcap
