#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "srattack/error.hpp"
#include "srattack/file_util.hpp"

#ifndef SRATTACK_VERSION
#define SRATTACK_VERSION "0.0.0"
#endif

namespace srattack {

inline constexpr const char* kToolkitVersion = SRATTACK_VERSION;

// Description of the fixed resampling choices, recorded with every attack run.
inline constexpr const char* kResamplerDescription =
    "downscale: cubic convolution a=-0.5, kernel stretched by k (antialiased), edge clamp; "
    "bicubic upscale: cubic convolution a=-0.5, edge clamp; "
    "padding: half-sample symmetric reflection to a multiple of k";

inline std::string sha256_hex(const std::vector<unsigned char>& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

inline std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(detail::read_file_bytes(path));
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Provenance record written next to the outputs of every run.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  std::string version = kToolkitVersion;
  std::string timestamp = utc_timestamp();

  nlohmann::json to_json() const {
    return {{"subcommand", subcommand},
            {"toolkit_version", version},
            {"timestamp", timestamp},
            {"config", config}};
  }

  void write(const std::filesystem::path& path) const {
    detail::write_text_file(path, to_json().dump(2) + "\n");
  }
};

}  // namespace srattack
