#pragma once

#include <exception>
#include <mutex>

namespace duio {

// Kernels that loop over independent work items (nodes, Monte-Carlo
// experiments) keep a plain serial path next to the OpenMP one; tests check
// the two agree bit for bit.
enum class Execution { Serial, Parallel };

// Captures the first exception thrown inside an OpenMP region so it can be
// rethrown on the calling thread.
class ExceptionSlot {
public:
    template <class F>
    void run(F&& f) noexcept {
        try {
            f();
        } catch (...) {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!error_) {
                error_ = std::current_exception();
            }
        }
    }

    void rethrow() const {
        if (error_) {
            std::rethrow_exception(error_);
        }
    }

private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

int available_threads();

}  // namespace duio
