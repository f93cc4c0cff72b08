#pragma once
// Deterministic output: RFC 4180 CSV (CRLF, minimal quoting, shortest
// round-trip doubles via to_chars), raw little-endian float64 arrays, and
// JSON run manifests. Given the same config and seeds, output bytes are
// identical across runs and platforms.
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gffpin/common.hpp"

namespace gffpin {

using Json = nlohmann::json;

inline std::string formatDouble(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  GFFPIN_CHECK(ec == std::errc(), "formatDouble: conversion failed");
  return std::string(buf, ptr);
}

inline std::string csvEscape(const std::string& field) {
  const bool needsQuote =
      field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needsQuote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary) {
    GFFPIN_CHECK(out_.good(), "CsvWriter: cannot open " << path.string());
  }

  void writeRow(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csvEscape(fields[i]);
    }
    out_ << "\r\n";
  }

  void close() {
    out_.close();
    GFFPIN_CHECK(out_.good(), "CsvWriter: write failed");
  }

 private:
  std::ofstream out_;
};

// Raw float64 array, little-endian, row-major (caller flattens).
inline void writeBinaryF64(const std::filesystem::path& path,
                           const std::vector<double>& data) {
  std::ofstream out(path, std::ios::binary);
  GFFPIN_CHECK(out.good(), "writeBinaryF64: cannot open " << path.string());
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  } else {
    for (double v : data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      char b[8];
      for (int i = 0; i < 8; ++i)
        b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
      out.write(b, 8);
    }
  }
  out.close();
  GFFPIN_CHECK(out.good(), "writeBinaryF64: write failed");
}

inline std::vector<double> readBinaryF64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  GFFPIN_CHECK(in.good(), "readBinaryF64: cannot open " << path.string());
  const std::streamsize bytes = in.tellg();
  GFFPIN_CHECK(bytes % 8 == 0, "readBinaryF64: size not a multiple of 8");
  in.seekg(0);
  std::vector<double> data(static_cast<std::size_t>(bytes / 8));
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(data.data()), bytes);
  } else {
    for (auto& v : data) {
      char b[8];
      in.read(b, 8);
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i]))
                << (8 * i);
      std::memcpy(&v, &bits, sizeof(v));
    }
  }
  GFFPIN_CHECK(in.good(), "readBinaryF64: read failed");
  return data;
}

// Rejects keys outside the allowed set — config typos fail loudly.
inline void checkKeys(const Json& j, const std::vector<std::string>& allowed,
                      const std::string& context) {
  GFFPIN_CHECK(j.is_object(), "config: " << context << " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) {
      std::string list;
      for (std::size_t i = 0; i < allowed.size(); ++i)
        list += (i ? ", " : "") + allowed[i];
      GFFPIN_CHECK(false, "config: unknown key '" << it.key() << "' in "
                   << context << " (allowed: " << list << ")");
    }
  }
}

template <class T>
T requireField(const Json& j, const std::string& key, const std::string& context) {
  GFFPIN_CHECK(j.contains(key),
               "config: missing required key '" << key << "' in " << context);
  try {
    return j.at(key).get<T>();
  } catch (const std::exception& e) {
    GFFPIN_CHECK(false, "config: bad value for '" << key << "' in " << context
                 << ": " << e.what());
  }
  return T{};
}

template <class T>
T optionalField(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

inline Json loadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  GFFPIN_CHECK(in.good(), "loadJsonFile: cannot open " << path.string());
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    GFFPIN_CHECK(false, "loadJsonFile: parse error in " << path.string()
                 << ": " << e.what());
  }
  return j;
}

inline void writeJsonFile(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  GFFPIN_CHECK(out.good(), "writeJsonFile: cannot open " << path.string());
  out << j.dump(2) << "\n";
  out.close();
  GFFPIN_CHECK(out.good(), "writeJsonFile: write failed");
}

// Run manifest: everything needed to reproduce the output bytes.
inline void writeManifest(const std::filesystem::path& dir, const Json& config,
                          double wallSeconds,
                          const std::vector<std::string>& warnings,
                          const std::vector<std::string>& outputs) {
  Json m;
  m["format"] = "run-manifest";
  m["tool_version"] = kVersion;
  m["config"] = config;
  m["wall_seconds"] = wallSeconds;
  m["warnings"] = warnings;
  m["outputs"] = outputs;
  writeJsonFile(dir / "manifest.json", m);
}

}  // namespace gffpin
