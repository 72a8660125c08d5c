#pragma once

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gvg {

inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw std::invalid_argument(msg);
    }
}

[[noreturn]] inline void fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

inline std::string shape_str(const std::vector<int64_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); i++) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

// Thread cap for the embarrassingly-parallel helpers (data generation,
// tokenization, metric sweeps). Controlled by GVG_THREADS, default 1 so a
// plain run is bitwise deterministic end to end.
int max_threads();

// Static chunking over [0, n). f(i) must only write slot i of pre-sized
// outputs; results are then identical for any thread count.
void parallel_for(int64_t n, const std::function<void(int64_t)>& f);

}  // namespace gvg
