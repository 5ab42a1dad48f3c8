#include "gclab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace gclab {

std::size_t default_workers() {
    if (const char* env = std::getenv("GCLAB_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace gclab
