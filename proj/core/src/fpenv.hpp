#pragma once

#if defined(__SSE__) || defined(__x86_64__)
#include <xmmintrin.h>
#define MINR_HAS_MXCSR 1
#endif

namespace minr::detail {

// Treats subnormal inputs and results as zero for the guard's lifetime.
// Gaussian and wavelet activations decay into the subnormal range, where x86
// arithmetic falls back to microcode and runs an order of magnitude slower.
// Every numeric kernel enters this mode, so results do not depend on which
// thread or entry point ran them.
class FlushSubnormals {
 public:
  FlushSubnormals() {
#ifdef MINR_HAS_MXCSR
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | kFlushBits);
#endif
  }
  ~FlushSubnormals() {
#ifdef MINR_HAS_MXCSR
    _mm_setcsr(saved_);
#endif
  }
  FlushSubnormals(const FlushSubnormals&) = delete;
  FlushSubnormals& operator=(const FlushSubnormals&) = delete;

 private:
#ifdef MINR_HAS_MXCSR
  static constexpr unsigned kFlushBits = 0x8040;  // FTZ | DAZ
  unsigned saved_ = 0;
#endif
};

}  // namespace minr::detail
