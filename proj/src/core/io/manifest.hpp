#pragma once

#include <map>
#include <string>

namespace stoat {

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

// key=value text record of a run directory: effective config, stage status,
// artifact hashes. Keys are kept sorted so equal runs give equal files.
class Manifest {
 public:
  static Manifest load_or_empty(const std::string& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void erase_prefix(const std::string& prefix);
  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string get(const std::string& key) const;

  void save(const std::string& path) const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace stoat
