#include "ongraph/kernels.hpp"

#include <atomic>
#include <string>

#include "ongraph/errors.hpp"

namespace ongraph::kernels {

#ifdef ONGRAPH_HAVE_AVX2_TU
const Ops* avx2_ops_impl();  // defined in kernels_avx2.cpp
#endif

bool avx2_supported() {
#if defined(ONGRAPH_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* avx2_ops() {
#ifdef ONGRAPH_HAVE_AVX2_TU
    if (avx2_supported()) return avx2_ops_impl();
#endif
    return nullptr;
}

namespace {
std::atomic<const Ops*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::Auto};

const Ops* resolve(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return &scalar_ops();
        case Backend::Avx2: {
            const Ops* ops = avx2_ops();
            if (!ops) throw ConfigError("avx2 kernels are not available on this CPU/build");
            return ops;
        }
        case Backend::Auto:
        default: {
            const Ops* ops = avx2_ops();
            return ops ? ops : &scalar_ops();
        }
    }
}
}  // namespace

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = resolve(Backend::Auto);
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

Backend active_backend() {
    const Ops& ops = active();
    return &ops == &scalar_ops() ? Backend::Scalar : Backend::Avx2;
}

void select(Backend b) {
    const Ops* ops = resolve(b);
    g_backend.store(b, std::memory_order_release);
    g_active.store(ops, std::memory_order_release);
}

Backend parse_backend(const char* name) {
    const std::string s = name ? name : "";
    if (s == "auto") return Backend::Auto;
    if (s == "scalar") return Backend::Scalar;
    if (s == "avx2") return Backend::Avx2;
    throw ConfigError("unknown kernel backend '" + s + "' (expected auto|scalar|avx2)");
}

}  // namespace ongraph::kernels
