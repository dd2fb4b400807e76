#include "qarc/kernels.hpp"

#include <atomic>

namespace qarc::kernels {

namespace {
std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* resolve() {
  return avx2::available() ? &avx2::table : &scalar::table;
}
}  // namespace

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = resolve();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void force(const KernelTable& table) {
  g_active.store(&table, std::memory_order_release);
}

void reset() { g_active.store(resolve(), std::memory_order_release); }

void matvec(const double* w, const double* x, const double* b, double* y,
            std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    y[i] = dot(w + i * cols, x, cols) + (b ? b[i] : 0.0);
  }
}

void matvec_t_acc(const double* w, const double* x, double* y, std::size_t rows,
                  std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    axpy(x[i], w + i * cols, y, cols);
  }
}

}  // namespace qarc::kernels
