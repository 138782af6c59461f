#include "manifest.hpp"

#include <filesystem>
#include <sstream>

#include <openssl/evp.h>

#include "../error.hpp"
#include "csv.hpp"

namespace stoat {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) == 1,
          ErrorCode::kInternal, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

Manifest Manifest::load_or_empty(const std::string& path) {
  Manifest m;
  if (!std::filesystem::exists(path)) return m;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    m.entries_[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

void Manifest::erase_prefix(const std::string& prefix) {
  for (auto it = entries_.lower_bound(prefix); it != entries_.end() && it->first.rfind(prefix, 0) == 0;)
    it = entries_.erase(it);
}

std::string Manifest::get(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? std::string() : it->second;
}

void Manifest::save(const std::string& path) const {
  std::ostringstream os;
  for (const auto& [k, v] : entries_) os << k << '=' << v << '\n';
  write_text_file(path, os.str());
}

}  // namespace stoat
