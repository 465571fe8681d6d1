#pragma once

#include <string>

#include "uvtex/tensor.hpp"

namespace uvtex {

// Raw tensor file: magic "UVT1", u32 dtype tag (0 = float32), u32 rank,
// u32 dims, then row-major float32 payload. All integers little-endian.
void save_uvt(const std::string& path, const Tensor& t);
Tensor load_uvt(const std::string& path);

} // namespace uvtex
