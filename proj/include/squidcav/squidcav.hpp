#pragma once

#include "squidcav/dynamics.hpp"
#include "squidcav/errors.hpp"
#include "squidcav/hamiltonians.hpp"
#include "squidcav/metrics.hpp"
#include "squidcav/protocol.hpp"
#include "squidcav/studies.hpp"
#include "squidcav/tensor_core.hpp"

namespace squidcav {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace squidcav
