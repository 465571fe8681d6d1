#pragma once

#include <string>

#include "uvtex/tensor.hpp"

namespace uvtex {

// 8-bit RGB PNG. Values clamped to [0,1] and quantized with round(v * 255).
// Tensors are {H, W, 3} channel-last.
void save_png(const std::string& path, const Tensor& image);
Tensor load_png(const std::string& path);

} // namespace uvtex
