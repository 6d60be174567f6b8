#include "csforge/manifest.hpp"

#include <json.hpp>

#include "csforge/util.hpp"

namespace csforge {

void Manifest::set(const std::string& key, double value) {
  config[key] = format_double(value, 6);
}

void Manifest::set(const std::string& key, std::size_t value) {
  config[key] = std::to_string(value);
}

void Manifest::write(const std::string& path) const {
  std::string out;
  nlohmann::json header;
  header["record"] = "header";
  header["tool"] = "csforge";
  header["subcommand"] = subcommand;
  header["threads"] = threads;
  out += header.dump() + "\n";

  nlohmann::json cfg;
  cfg["record"] = "config";
  for (const auto& [k, v] : config) cfg[k] = v;
  out += cfg.dump() + "\n";

  for (const auto& input : inputs) {
    nlohmann::json line;
    line["record"] = "input";
    line["path"] = input;
    line["fnv1a64"] = file_digest_hex(input);
    out += line.dump() + "\n";
  }
  for (const auto& output : outputs) {
    nlohmann::json line;
    line["record"] = "output";
    line["path"] = output;
    out += line.dump() + "\n";
  }
  write_file(path, out);
}

}  // namespace csforge
