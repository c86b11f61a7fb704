#pragma once

#include <string>

#include "midsim/net/model.hpp"

namespace midsim::net {

// `midsim-ckpt v1`: magic, architecture hash, then named float32 blobs.
// Loading refuses files whose architecture hash differs from `arch`.
void save_checkpoint(const std::string& path, const NetParams<float>& params);
NetParams<float> load_checkpoint(const std::string& path,
                                 const ArchConfig& arch);

}  // namespace midsim::net
