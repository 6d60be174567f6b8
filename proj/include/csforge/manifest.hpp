#pragma once

#include <map>
#include <string>
#include <vector>

namespace csforge {

// Run manifest written alongside every subcommand's primary outputs as
// JSON-lines: a header line, one config line, one line per input digest,
// one line per declared output. No timestamps, so identical runs produce
// byte-identical manifests.
struct Manifest {
  std::string subcommand;
  unsigned threads = 1;
  std::map<std::string, std::string> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void set(const std::string& key, const std::string& value) { config[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, std::size_t value);

  void write(const std::string& path) const;
};

}  // namespace csforge
