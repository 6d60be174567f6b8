#pragma once

#include <map>
#include <string>

#include "csforge/graph.hpp"
#include "csforge/tensor.hpp"

namespace csforge {

// Versioned binary container shared by all model checkpoints.
// Layout (all integers little-endian):
//   magic "CSFG" | u32 version | u32 entry_count
//   per entry, sorted by name:
//     u32 name_len | name bytes | u32 rank | u64 dims[rank] | f64 data[...]
inline constexpr char kCheckpointMagic[4] = {'C', 'S', 'F', 'G'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path,
                     const std::map<std::string, Tensor>& entries);
std::map<std::string, Tensor> load_checkpoint(const std::string& path);

// Parameter-store round trip. Extra scalar metadata rides along under the
// reserved "meta/" prefix and is returned separately on load.
void save_params(const std::string& path, const ParameterStore& params,
                 const std::map<std::string, double>& meta = {});
std::map<std::string, double> load_params(const std::string& path,
                                          ParameterStore& params);

}  // namespace csforge
