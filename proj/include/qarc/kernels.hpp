#pragma once

#include <cstddef>

// Double-precision inner loops used by the tensor engine. Each kernel has a
// scalar reference implementation and an AVX2 variant; dispatch() picks one
// at startup based on what the CPU supports. SIMD variants may reassociate
// sums, so they agree with the scalar reference to rounding, not bit-exactly.

namespace qarc::kernels {

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*sumsq)(const double* a, std::size_t n);
  const char* name;
};

namespace scalar {
extern const KernelTable table;
}
namespace avx2 {
// Present on every build; `available()` reports whether the CPU can run it.
bool available();
extern const KernelTable table;
}

// Active table, resolved once on first use.
const KernelTable& active();

// Force a specific table (tests use this to pin the scalar path).
void force(const KernelTable& table);
void reset();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void add(const double* a, const double* b, double* out, std::size_t n) {
  active().add(a, b, out, n);
}
inline void sub(const double* a, const double* b, double* out, std::size_t n) {
  active().sub(a, b, out, n);
}
inline void mul(const double* a, const double* b, double* out, std::size_t n) {
  active().mul(a, b, out, n);
}
inline void scale(double alpha, double* x, std::size_t n) {
  active().scale(alpha, x, n);
}
inline double sum(const double* a, std::size_t n) { return active().sum(a, n); }
inline double sumsq(const double* a, std::size_t n) { return active().sumsq(a, n); }

// y[i] = dot(W[i,:], x) + b[i], W row-major rows x cols. b may be null.
void matvec(const double* w, const double* x, const double* b, double* y,
            std::size_t rows, std::size_t cols);
// y[j] += sum_i W[i,j] * x[i]  (transpose apply, used by backward passes)
void matvec_t_acc(const double* w, const double* x, double* y, std::size_t rows,
                  std::size_t cols);

}  // namespace qarc::kernels
