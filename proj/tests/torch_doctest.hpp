#pragma once

// libtorch's glog-shim logging macros use the same short names as doctest's
// assertions and are defined unconditionally, so torch must come first and
// the collisions must be cleared before doctest defines the real asserts.
// Define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN before including this header.

#include <torch/torch.h>

#undef CHECK
#undef CHECK_EQ
#undef CHECK_NE
#undef CHECK_LE
#undef CHECK_LT
#undef CHECK_GE
#undef CHECK_GT

#include <doctest.h>
